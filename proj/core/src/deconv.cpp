#include "gaussmom/deconv.hpp"

#include <optional>
#include <type_traits>

namespace gaussmom {

namespace {

// Gauss-Jordan over the rationals. Returns the first column without a pivot
// when the matrix is singular.
std::optional<std::size_t> invert(RationalMatrix a, RationalMatrix& inverse) {
  std::size_t n = a.rows;
  inverse = RationalMatrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && a(pivot, col) == 0) ++pivot;
    if (pivot == n) return col;
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a(pivot, j), a(col, j));
        std::swap(inverse(pivot, j), inverse(col, j));
      }
    }
    Rational scale = 1 / a(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      a(col, j) *= scale;
      inverse(col, j) *= scale;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col || a(i, col) == 0) continue;
      Rational f = a(i, col);
      for (std::size_t j = 0; j < n; ++j) {
        a(i, j) -= f * a(col, j);
        inverse(i, j) -= f * inverse(col, j);
      }
    }
  }
  return std::nullopt;
}

Rational determinant(RationalMatrix a) {
  std::size_t n = a.rows;
  Rational det = 1;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && a(pivot, col) == 0) ++pivot;
    if (pivot == n) return 0;
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(pivot, j), a(col, j));
      det = -det;
    }
    det *= a(col, col);
    for (std::size_t i = col + 1; i < n; ++i) {
      if (a(i, col) == 0) continue;
      Rational f = a(i, col) / a(col, col);
      for (std::size_t j = col; j < n; ++j) a(i, j) -= f * a(col, j);
    }
  }
  return det;
}

RationalMatrix submatrix(const RationalMatrix& a, const std::vector<std::size_t>& rows,
                         const std::vector<std::size_t>& cols) {
  RationalMatrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = a(rows[i], cols[j]);
  return out;
}

std::vector<double> to_doubles(const RationalMatrix& a) {
  std::vector<double> out(a.data.size());
  for (std::size_t i = 0; i < a.data.size(); ++i) out[i] = to_double(a.data[i]);
  return out;
}

std::string singular_message(int weight) {
  return "transfer map is singular at weight " + std::to_string(weight) + "; no unbiased inverse exists";
}

template <typename T>
T convert(const Rational& q) {
  if constexpr (std::is_same_v<T, double>) {
    return to_double(q);
  } else {
    return q;
  }
}

}  // namespace

Deconvolver build_deconvolver(const TransferMap& map, DeconvStrategy strategy) {
  if (!map.is_square()) throw std::invalid_argument("only maps from a basis to itself can be inverted");
  Deconvolver d;
  d.forward_ = map;
  d.matrix_ = map.evaluate();
  const Basis& basis = map.input_basis();
  bool triangular = map.is_weight_triangular();

  if (triangular) {
    for (int w = 0; w <= basis.max_weight(); ++w) {
      d.blocks_.push_back(basis.weight_block(w));
      RationalMatrix block = submatrix(d.matrix_, d.blocks_.back(), d.blocks_.back());
      BlockDiagnostic diag;
      diag.weight = w;
      diag.size = block.rows;
      diag.determinant = determinant(block);
      diag.unit_diagonal = block == RationalMatrix::identity(block.rows);
      d.report_.push_back(diag);
    }
    for (const auto& diag : d.report_)
      if (diag.determinant == 0) throw SingularStageError(diag.weight, 0, singular_message(diag.weight));
  }

  if (strategy == DeconvStrategy::kAuto)
    strategy = triangular && !map.preserves_weight() ? DeconvStrategy::kBackSubstitution
                                                     : DeconvStrategy::kMatrixInverse;
  d.strategy_ = strategy;

  if (strategy == DeconvStrategy::kBackSubstitution) {
    if (!triangular) throw std::invalid_argument("back-substitution needs a weight-triangular map");
    for (const auto& block : d.blocks_) {
      RationalMatrix inverse;
      invert(submatrix(d.matrix_, block, block), inverse);
      d.block_inverses_double_.push_back(to_doubles(inverse));
      d.block_inverses_.push_back(std::move(inverse));
    }
  } else {
    if (auto col = invert(d.matrix_, d.inverse_)) {
      int weight = basis.key(*col).weight();
      throw SingularStageError(weight, 0, singular_message(weight));
    }
    d.inverse_double_ = to_doubles(d.inverse_);
  }
  return d;
}

namespace {

template <typename T>
std::vector<T> back_substitute(const RationalMatrix& a, const std::vector<std::vector<std::size_t>>& blocks,
                               const std::vector<RationalMatrix>& inverses,
                               const std::vector<std::vector<double>>& inverses_double, const std::vector<T>& y) {
  std::vector<T> x(y.size(), T(0));
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& rows = blocks[b];
    std::vector<T> rhs(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      T r = y[rows[i]];
      for (std::size_t lower = 0; lower < b; ++lower)
        for (std::size_t j : blocks[lower])
          if (a(rows[i], j) != 0) r -= convert<T>(a(rows[i], j)) * x[j];
      rhs[i] = r;
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      T v(0);
      for (std::size_t j = 0; j < rows.size(); ++j) {
        if constexpr (std::is_same_v<T, double>) {
          v += inverses_double[b][i * rows.size() + j] * rhs[j];
        } else {
          v += inverses[b](i, j) * rhs[j];
        }
      }
      x[rows[i]] = v;
    }
  }
  return x;
}

}  // namespace

MomentVector Deconvolver::apply(const MomentVector& observed) const {
  if (!(observed.basis() == forward_.output_basis()))
    throw std::invalid_argument("observed moments are not on the output basis of the map");
  const Basis& basis = forward_.input_basis();
  std::size_t n = basis.size();
  if (observed.is_exact()) {
    const auto& y = observed.exact_values();
    if (strategy_ == DeconvStrategy::kBackSubstitution)
      return MomentVector::exact(basis, back_substitute<Rational>(matrix_, blocks_, block_inverses_,
                                                                  block_inverses_double_, y));
    std::vector<Rational> x(n, Rational(0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (inverse_(i, j) != 0) x[i] += inverse_(i, j) * y[j];
    return MomentVector::exact(basis, std::move(x));
  }
  std::vector<double> y = observed.values();
  if (strategy_ == DeconvStrategy::kBackSubstitution)
    return MomentVector::approximate(
        basis, back_substitute<double>(matrix_, blocks_, block_inverses_, block_inverses_double_, y));
  std::vector<double> x(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) x[i] += inverse_double_[i * n + j] * y[j];
  return MomentVector::approximate(basis, std::move(x));
}

MomentVector deconvolve(const Deconvolver& d, const MomentVector& observed) { return d.apply(observed); }

std::vector<MomentVector> deconvolve_all(const Deconvolver& d, const std::vector<MomentVector>& observed) {
  std::vector<MomentVector> out(observed.size());
  parallel_for(observed.size(), [&](std::size_t i) { out[i] = d.apply(observed[i]); });
  return out;
}

MultistageDeconvolver::MultistageDeconvolver(const CompiledModel& model, DeconvStrategy strategy) {
  for (std::size_t s = 0; s < model.stages.size(); ++s) {
    try {
      stages_.push_back(build_deconvolver(model.stages[s], strategy));
    } catch (const SingularStageError& e) {
      throw SingularStageError(e.weight(), s,
                               "stage " + std::to_string(s + 1) + " (" +
                                   std::string(theorem_name(model.stages[s].theorem())) + "): " + e.what());
    } catch (const std::invalid_argument& e) {
      throw ModelError("stage " + std::to_string(s + 1) + " (" +
                       std::string(theorem_name(model.stages[s].theorem())) + ") cannot be inverted: " + e.what());
    }
  }
}

MomentVector MultistageDeconvolver::apply(const MomentVector& observed) const {
  MomentVector v = observed;
  for (auto it = stages_.rbegin(); it != stages_.rend(); ++it) v = it->apply(v);
  return v;
}

MomentVector observation_moments(const ModelExpr& model, const Matrix& observation, int max_weight) {
  if (observes_amplitude(model)) {
    long n = model.kind == NodeKind::kDet ? model.rows : model.n;
    long N = amplitude_columns(model);
    if (observation.rows() != n || observation.cols() != N)
      throw ModelError("observation is " + std::to_string(observation.rows()) + "x" +
                       std::to_string(observation.cols()) + " but the model is observed as an " + std::to_string(n) +
                       "x" + std::to_string(N) + " amplitude");
    return eval_mixed_moments(observation * observation.adjoint() / static_cast<double>(N), max_weight);
  }
  long n = model.size();
  if (observation.rows() != n || observation.cols() != n)
    throw ModelError("observation is " + std::to_string(observation.rows()) + "x" +
                     std::to_string(observation.cols()) + " but the model is " + std::to_string(n) + "x" +
                     std::to_string(n));
  return eval_mixed_moments(observation, max_weight);
}

MomentVector unbiased_estimate(const ModelExpr& model, const std::vector<Matrix>& observations, int max_weight,
                               DeconvStrategy strategy) {
  if (observations.empty()) throw std::invalid_argument("no observations");
  Basis basis = Basis::one_sided(max_weight);
  std::vector<double> mean(basis.size(), 0.0);
  for (const auto& obs : observations) {
    std::vector<double> v = observation_moments(model, obs, max_weight).values();
    for (std::size_t i = 0; i < v.size(); ++i) mean[i] += v[i];
  }
  for (auto& v : mean) v /= static_cast<double>(observations.size());
  MultistageDeconvolver chain(compile_stages(model, max_weight), strategy);
  return chain.apply(MomentVector::approximate(basis, std::move(mean)));
}

MomentVector unbiased_estimate(const ModelExpr& model, const Matrix& observation, int max_weight,
                               DeconvStrategy strategy) {
  return unbiased_estimate(model, std::vector<Matrix>{observation}, max_weight, strategy);
}

}  // namespace gaussmom
