#include "gaussmom/mc_oracle.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <limits>
#include <ostream>

namespace gaussmom {

Matrix sample_complex_gaussian(long n, long N, RandomStream& rng) {
  Matrix x(n, N);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < N; ++j) x(i, j) = rng.complex_normal();
  return x;
}

Matrix sample_selfadjoint_gaussian(long n, RandomStream& rng) {
  Matrix y = sample_complex_gaussian(n, n, rng);
  return (y + y.adjoint()) / std::sqrt(2.0);
}

namespace {

Matrix leaf_matrix(const ModelExpr& leaf, const DetMatrixSet& bindings) {
  if (leaf.is_identity_leaf()) return Matrix::Identity(leaf.rows, leaf.cols);
  if (leaf.is_zero_leaf()) return Matrix::Zero(leaf.rows, leaf.cols);
  if (!bindings.contains(leaf.name)) throw ModelError("no matrix bound to det(" + leaf.name + ")");
  const Matrix& m = bindings.at(leaf.name);
  if (m.rows() != leaf.rows || m.cols() != leaf.cols)
    throw ModelError("det(" + leaf.name + ") is declared " + std::to_string(leaf.rows) + "x" +
                     std::to_string(leaf.cols) + " but bound to a " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + " matrix");
  return m;
}

Matrix gram(const Matrix& d) { return d * d.adjoint() / static_cast<double>(d.cols()); }

// An n x N amplitude D with (1/N) D D^H = g.
Matrix amplitude_of_gram(const Matrix& g, long N) {
  Matrix h = (g + g.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
  const auto& values = eig.eigenvalues();
  double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  long n = g.rows();
  Matrix d = Matrix::Zero(n, N);
  long col = 0;
  for (long i = n - 1; i >= 0; --i) {
    double v = values(i);
    if (v < -1e-9 * scale) throw ModelError("sum(...) term is not positive semidefinite");
    if (v <= 1e-12 * scale) continue;
    if (col == N)
      throw ModelError("sum(...) term has rank above N = " + std::to_string(N) + " and has no n x N amplitude");
    d.col(col++) = eig.eigenvectors().col(i) * std::sqrt(v * static_cast<double>(N));
  }
  return d;
}

Matrix sample_node(const ModelExpr& m, const DetMatrixSet& bindings, RandomStream& rng);

Matrix sample_sum_amplitude(const ModelExpr& m, const DetMatrixSet& bindings, RandomStream& rng) {
  const ModelExpr& base = m.children[0];
  Matrix d = base.kind == NodeKind::kDet ? leaf_matrix(base, bindings)
                                         : amplitude_of_gram(sample_node(base, bindings, rng), m.N);
  return d + sample_complex_gaussian(m.n, m.N, rng) * to_double(m.sigma);
}

Matrix sample_node(const ModelExpr& m, const DetMatrixSet& bindings, RandomStream& rng) {
  switch (m.kind) {
    case NodeKind::kDet: {
      Matrix d = leaf_matrix(m, bindings);
      return m.rows == m.cols ? d : gram(d);
    }
    case NodeKind::kGaussComplex:
      return gram(sample_complex_gaussian(m.n, m.N, rng) * to_double(m.sigma));
    case NodeKind::kGaussSelfAdjoint:
      return sample_selfadjoint_gaussian(m.n, rng) * (to_double(m.sigma) / std::sqrt(static_cast<double>(m.n)));
    case NodeKind::kGaussSum:
      return gram(sample_sum_amplitude(m, bindings, rng));
    case NodeKind::kCorrProduct: {
      Matrix r = sample_node(m.children[0], bindings, rng);
      Matrix s = sample_node(m.children[1], bindings, rng);
      Matrix x = sample_complex_gaussian(m.n, m.N, rng);
      return r * x * s * x.adjoint() / static_cast<double>(m.N);
    }
    case NodeKind::kSelfAdjProduct: {
      Matrix e = sample_node(m.children[0], bindings, rng);
      return e * sample_selfadjoint_gaussian(m.n, rng) / std::sqrt(static_cast<double>(m.n));
    }
    case NodeKind::kSelfAdjSum: {
      Matrix e = sample_node(m.children[0], bindings, rng);
      return e + sample_selfadjoint_gaussian(m.n, rng) * (to_double(m.sigma) / std::sqrt(static_cast<double>(m.n)));
    }
    case NodeKind::kChain: {
      Matrix e = sample_node(m.children[0], bindings, rng);
      for (std::size_t i = 1; i < m.children.size(); ++i) {
        const ModelExpr& g = m.children[i];
        e = e * gram(sample_complex_gaussian(g.n, g.N, rng) * to_double(g.sigma));
      }
      return e;
    }
    case NodeKind::kScale:
      return sample_node(m.children[0], bindings, rng) * to_double(m.factor);
  }
  throw std::logic_error("unhandled model node");
}

struct Accumulator {
  double count = 0.0;
  std::vector<double> mean;
  std::vector<double> m2;

  explicit Accumulator(std::size_t size = 0) : mean(size, 0.0), m2(size, 0.0) {}

  void add(const std::vector<double>& x) {
    count += 1.0;
    for (std::size_t i = 0; i < mean.size(); ++i) {
      double delta = x[i] - mean[i];
      mean[i] += delta / count;
      m2[i] += delta * (x[i] - mean[i]);
    }
  }

  void merge(const Accumulator& other) {
    if (other.count == 0.0) return;
    double total = count + other.count;
    for (std::size_t i = 0; i < mean.size(); ++i) {
      double delta = other.mean[i] - mean[i];
      mean[i] += delta * other.count / total;
      m2[i] += other.m2[i] + delta * delta * count * other.count / total;
    }
    count = total;
  }
};

constexpr std::uint64_t kChunk = 256;

}  // namespace

Matrix sample_model(const ModelExpr& model, const DetMatrixSet& bindings, RandomStream& rng) {
  return sample_node(model, bindings, rng);
}

Matrix sample_amplitude(const ModelExpr& model, const DetMatrixSet& bindings, RandomStream& rng) {
  switch (model.kind) {
    case NodeKind::kGaussSum:
      return sample_sum_amplitude(model, bindings, rng);
    case NodeKind::kGaussComplex:
      return sample_complex_gaussian(model.n, model.N, rng) * to_double(model.sigma);
    case NodeKind::kDet:
      if (model.rows != model.cols) return leaf_matrix(model, bindings);
      break;
    default:
      break;
  }
  throw ModelError("model " + render_model(model) + " is not observed through an amplitude");
}

EmpiricalMoments monte_carlo_mean(const Basis& basis, std::uint64_t trials, std::uint64_t seed,
                                  const std::function<std::vector<double>(RandomStream&)>& trial) {
  if (trials == 0) throw std::invalid_argument("at least one trial is needed");
  std::size_t chunks = static_cast<std::size_t>((trials + kChunk - 1) / kChunk);
  std::vector<Accumulator> parts(chunks, Accumulator(basis.size()));
  parallel_for(chunks, [&](std::size_t c) {
    std::uint64_t end = std::min<std::uint64_t>(trials, (c + 1) * kChunk);
    for (std::uint64_t t = c * kChunk; t < end; ++t) {
      RandomStream rng(seed, t);
      parts[c].add(trial(rng));
    }
  });
  Accumulator total(basis.size());
  for (const auto& part : parts) total.merge(part);

  EmpiricalMoments out;
  out.basis = basis;
  out.trials = trials;
  out.mean = total.mean;
  out.std_error.resize(basis.size());
  double t = static_cast<double>(trials);
  for (std::size_t i = 0; i < basis.size(); ++i)
    out.std_error[i] = trials > 1 ? std::sqrt(std::max(0.0, total.m2[i]) / (t - 1.0) / t) : 0.0;
  return out;
}

EmpiricalMoments empirical_mixed_moments(const EnsembleSpec& spec, int max_weight) {
  check_dimensions(spec.model);
  Basis basis = Basis::one_sided(max_weight);
  return monte_carlo_mean(basis, spec.trials, spec.seed, [&](RandomStream& rng) {
    return eval_mixed_moments(sample_model(spec.model, spec.bindings, rng), max_weight).values();
  });
}

MomentVector input_moments(const CompiledModel& compiled, const DetMatrixSet& bindings) {
  const ModelInput& in = compiled.input;
  int P = compiled.input_basis.max_weight();
  auto leaf = [&](std::size_t i) {
    ModelExpr e = det(in.names[i], in.shapes[i].first, in.shapes[i].second);
    return leaf_matrix(e, bindings);
  };
  switch (in.kind) {
    case ModelInput::Kind::kNone: {
      std::vector<Rational> v(compiled.input_basis.size(), Rational(0));
      v[0] = 1;
      return MomentVector::exact(compiled.input_basis, std::move(v));
    }
    case ModelInput::Kind::kMatrix:
      return eval_mixed_moments(leaf(0), P);
    case ModelInput::Kind::kGram:
      return eval_mixed_moments(gram(leaf(0)), P);
    case ModelInput::Kind::kPair: {
      Matrix r = leaf(0);
      Matrix s = leaf(1);
      if (r.rows() != r.cols()) r = gram(r);
      if (s.rows() != s.cols()) s = gram(s);
      return eval_mixed_moments(r, s, P);
    }
  }
  throw std::logic_error("unhandled model input");
}

bool ValidationReport::passed() const {
  return std::all_of(rows.begin(), rows.end(), [&](const ValidationRow& r) { return std::abs(r.z) <= threshold; });
}

double ValidationReport::max_abs_z() const {
  double worst = 0.0;
  for (const auto& r : rows) worst = std::max(worst, std::abs(r.z));
  return worst;
}

ValidationReport validate(const TransferMap& map, const EnsembleSpec& spec, int max_weight) {
  CompiledModel compiled = compile_stages(spec.model, max_weight);
  if (!(map.input_basis() == compiled.input_basis))
    throw std::invalid_argument("transfer map does not take the model's input moments");
  std::vector<double> predicted = map.evaluated().apply(input_moments(compiled, spec.bindings)).values();
  EmpiricalMoments empirical = empirical_mixed_moments(spec, max_weight);

  ValidationReport report;
  report.trials = spec.trials;
  const Basis& out = map.output_basis();
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::size_t j = empirical.basis.index_of(out.key(i));
    ValidationRow row;
    row.key = out.key(i).to_string();
    row.predicted = predicted[i];
    row.empirical = empirical.mean[j];
    row.std_error = empirical.std_error[j];
    double diff = row.empirical - row.predicted;
    if (row.std_error > 0.0) {
      row.z = diff / row.std_error;
    } else {
      bool agree = std::abs(diff) <= 1e-9 * std::max(1.0, std::abs(row.predicted));
      row.z = agree ? 0.0 : std::numeric_limits<double>::infinity();
    }
    report.rows.push_back(row);
  }
  return report;
}

ValidationReport validate(const EnsembleSpec& spec, int max_weight) {
  return validate(compile(spec.model, max_weight), spec, max_weight);
}

void write_report(std::ostream& out, const ValidationReport& report) {
  out << "key\tpredicted\tempirical\tse\tz\n";
  char buf[160];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%s\t%.10g\t%.10g\t%.4g\t%.3f\n", r.key.c_str(), r.predicted, r.empirical, r.std_error,
                  r.z);
    out << buf;
  }
}

}  // namespace gaussmom
