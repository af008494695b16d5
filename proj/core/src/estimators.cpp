#include "gaussmom/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace gaussmom {

std::vector<std::pair<MomentKey, Rational>> newton_girard_coefficients(int r, long n) {
  if (r < 0) throw std::invalid_argument("negative degree");
  // e_k as a combination of unnormalized power-sum products, by
  // k e_k = sum_i (-1)^(i-1) e_(k-i) p_i.
  std::vector<std::map<MomentKey, Rational>> e(static_cast<std::size_t>(r) + 1);
  e[0][MomentKey{}] = 1;
  for (int k = 1; k <= r; ++k) {
    auto& ek = e[static_cast<std::size_t>(k)];
    for (int i = 1; i <= k; ++i) {
      Rational sign = i % 2 == 1 ? Rational(1) : Rational(-1);
      for (const auto& [key, coeff] : e[static_cast<std::size_t>(k - i)])
        ek[key.with_part(i)] += sign * coeff / k;
    }
  }
  std::vector<std::pair<MomentKey, Rational>> out;
  for (const auto& [key, coeff] : e[static_cast<std::size_t>(r)]) {
    if (coeff == 0) continue;
    Rational a = coeff;
    for (int j = 0; j < key.length(); ++j) a *= n;
    out.emplace_back(key, a);
  }
  return out;
}

namespace {

void require_weight(const MomentVector& moments, int k) {
  if (k < 1) throw std::invalid_argument("rank cap must be at least 1");
  if (moments.basis().two_sided_basis()) throw std::invalid_argument("elementary polynomials need one-sided moments");
  if (moments.basis().max_weight() < k)
    throw std::invalid_argument("moments stop at weight " + std::to_string(moments.basis().max_weight()) +
                                " but rank cap " + std::to_string(k) + " needs weight " + std::to_string(k));
}

}  // namespace

std::vector<double> elementary_from_moments(const MomentVector& moments, int k, long n) {
  require_weight(moments, k);
  std::vector<double> e;
  for (int r = 1; r <= k; ++r) {
    double v = 0.0;
    for (const auto& [key, a] : newton_girard_coefficients(r, n)) v += to_double(a) * moments.value(key);
    e.push_back(v);
  }
  return e;
}

std::vector<Rational> elementary_from_moments_exact(const MomentVector& moments, int k, long n) {
  require_weight(moments, k);
  std::vector<Rational> e;
  for (int r = 1; r <= k; ++r) {
    Rational v = 0;
    for (const auto& [key, a] : newton_girard_coefficients(r, n)) v += a * moments.exact_value(key);
    e.push_back(v);
  }
  return e;
}

std::vector<double> elementary_from_spectrum(const std::vector<double>& values, int k) {
  std::vector<double> e(static_cast<std::size_t>(k) + 1, 0.0);
  e[0] = 1.0;
  for (double x : values)
    for (int r = k; r >= 1; --r) e[static_cast<std::size_t>(r)] += x * e[static_cast<std::size_t>(r - 1)];
  return {e.begin() + 1, e.end()};
}

double rate_core_estimate(const std::vector<double>& elementary, double snr, double scale) {
  if (snr <= 0.0) throw std::invalid_argument("SNR must be positive");
  double core = 1.0;
  double power = 1.0;
  for (double e : elementary) {
    power *= snr * scale;
    core += power * e;
  }
  return core;
}

RateEstimate rate(const std::vector<double>& elementary, double snr, long n, double scale) {
  RateEstimate out;
  out.core = rate_core_estimate(elementary, snr, scale);
  if (out.core > 0.0) out.rate = std::log2(out.core) / static_cast<double>(n);
  return out;
}

RootEstimate eigenvalues_from_elementary(const std::vector<double>& elementary) {
  if (elementary.empty()) throw std::invalid_argument("need at least e_1");
  auto k = static_cast<Eigen::Index>(elementary.size());
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    double sign = j % 2 == 0 ? 1.0 : -1.0;
    companion(0, j) = sign * elementary[static_cast<std::size_t>(j)];
  }
  for (Eigen::Index i = 1; i < k; ++i) companion(i, i - 1) = 1.0;

  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  RootEstimate out;
  for (Eigen::Index i = 0; i < k; ++i) {
    std::complex<double> z = solver.eigenvalues()(i);
    if (std::abs(z.imag()) > 1e-9 * std::max(1.0, std::abs(z))) out.complex_discarded = true;
    double v = z.real();
    if (v < 0.0) {
      v = 0.0;
      out.clamped = true;
    }
    out.values.push_back(v);
  }
  std::sort(out.values.begin(), out.values.end(), std::greater<>());
  return out;
}

PreparedObservations combine_observations(const std::vector<Matrix>& observations, const Rational& sigma2,
                                          CombineStrategy strategy) {
  if (observations.empty()) throw std::invalid_argument("no observations");
  long n = observations.front().rows();
  long N = observations.front().cols();
  for (const auto& y : observations)
    if (y.rows() != n || y.cols() != N)
      throw ModelError("observations differ in shape: " + std::to_string(n) + "x" + std::to_string(N) + " and " +
                       std::to_string(y.rows()) + "x" + std::to_string(y.cols()));
  auto L = static_cast<long>(observations.size());
  PreparedObservations out;
  out.n = n;
  out.N = N;
  out.sigma2 = sigma2;
  out.strategy = strategy;
  switch (strategy) {
    case CombineStrategy::kAverage: {
      Matrix mean = Matrix::Zero(n, N);
      for (const auto& y : observations) mean += y;
      out.matrices = {mean / static_cast<double>(L)};
      out.sigma2 = sigma2 / L;
      break;
    }
    case CombineStrategy::kStack: {
      Matrix stacked(n, N * L);
      for (long i = 0; i < L; ++i) stacked.middleCols(i * N, N) = observations[static_cast<std::size_t>(i)];
      out.matrices = {stacked};
      out.N = N * L;
      break;
    }
    case CombineStrategy::kPerObservation:
      out.matrices = observations;
      break;
  }
  return out;
}

MomentVector estimate_signal_moments(const PreparedObservations& prepared, int max_weight) {
  Basis basis = Basis::one_sided(max_weight);
  std::vector<double> mean(basis.size(), 0.0);
  for (const auto& y : prepared.matrices) {
    std::vector<double> v = eval_mixed_moments(y * y.adjoint() / static_cast<double>(prepared.N), max_weight).values();
    for (std::size_t i = 0; i < v.size(); ++i) mean[i] += v[i];
  }
  for (auto& v : mean) v /= static_cast<double>(prepared.matrices.size());
  Deconvolver d = build_deconvolver(gauss_sum_transfer(prepared.n, prepared.N, max_weight, prepared.sigma2)
                                        .with_dims({prepared.n, prepared.N}));
  return d.apply(MomentVector::approximate(basis, std::move(mean)));
}

SpectralEstimate spectral_estimate(const MomentVector& moments, int rank_cap, long n) {
  SpectralEstimate out;
  out.moments = moments;
  out.rank_cap = rank_cap;
  out.elementary_symmetric = elementary_from_moments(moments, rank_cap, n);
  out.eigenvalues = eigenvalues_from_elementary(out.elementary_symmetric);
  return out;
}

RatePipelineResult rate_pipeline(const std::vector<Matrix>& observations, const Rational& sigma2, double snr,
                                 int rank, CombineStrategy strategy, RateScale scale) {
  PreparedObservations prepared = combine_observations(observations, sigma2, strategy);
  long N = observations.front().cols();
  RatePipelineResult out;
  out.spectrum = spectral_estimate(estimate_signal_moments(prepared, rank), rank, prepared.n);
  double factor = scale == RateScale::kGram ? static_cast<double>(N) : 1.0;
  out.rate = rate(out.spectrum.elementary_symmetric, snr, prepared.n, factor);
  return out;
}

ModelExpr power_model(long K, long N, long M, const Rational& sigma) {
  ModelExpr signal = corr_product(det("I", N, N), corr_product(det("P", K, K), det("I", M, M), K, M), N, K);
  return gauss_sum(scale(std::move(signal), Rational(K)), gauss_complex(N, M, sigma));
}

SpectralEstimate power_estimation(const std::vector<Matrix>& observations, long K, long N, long M,
                                  const Rational& sigma, int max_weight) {
  if (observations.empty()) throw std::invalid_argument("no observations");
  int P = std::max(max_weight, static_cast<int>(K));
  ModelExpr model = power_model(K, N, M, sigma);
  MultistageDeconvolver chain(compile_stages(model, P));
  Basis basis = Basis::one_sided(P);
  std::vector<double> mean(basis.size(), 0.0);
  for (const auto& y : observations) {
    std::vector<double> v = observation_moments(model, y, P).values();
    for (std::size_t i = 0; i < v.size(); ++i) mean[i] += v[i];
  }
  for (auto& v : mean) v /= static_cast<double>(observations.size());
  return spectral_estimate(chain.apply(MomentVector::approximate(basis, std::move(mean))), static_cast<int>(K), K);
}

}  // namespace gaussmom
