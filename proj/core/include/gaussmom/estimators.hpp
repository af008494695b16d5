#pragma once

// Estimators built on deconvolved moments: elementary symmetric polynomials
// of the spectrum, the rate core prod(1 + rho lambda_i), eigenvalue recovery
// and the power-estimation pipeline.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "gaussmom/deconv.hpp"
#include "gaussmom/matrix.hpp"
#include "gaussmom/moment_space.hpp"
#include "gaussmom/rational.hpp"

namespace gaussmom {

// e_r = sum over partitions lambda of r of a_lambda * M_lambda, where M are
// normalized-trace mixed moments of an n x n matrix:
// a_lambda = (-1)^(r - len) n^len / z_lambda.
std::vector<std::pair<MomentKey, Rational>> newton_girard_coefficients(int r, long n);

// e_1..e_k from mixed moments of weight <= k of an n x n matrix. Throws
// std::invalid_argument when the vector stops below weight k.
std::vector<double> elementary_from_moments(const MomentVector& moments, int k, long n);
std::vector<Rational> elementary_from_moments_exact(const MomentVector& moments, int k, long n);
// e_1..e_k of a list of numbers.
std::vector<double> elementary_from_spectrum(const std::vector<double>& values, int k);

struct RateEstimate {
  double core = 1.0;
  std::optional<double> rate;  // unset when core <= 0
};

// 1 + sum_r (snr * scale)^r e_r. The scale turns the spectrum the moments
// describe into the one the rate is defined on.
double rate_core_estimate(const std::vector<double>& elementary, double snr, double scale = 1.0);
// (1/n) log2(rate core).
RateEstimate rate(const std::vector<double>& elementary, double snr, long n, double scale = 1.0);

struct RootEstimate {
  std::vector<double> values;     // descending
  bool complex_discarded = false; // some root had a nonnegligible imaginary part
  bool clamped = false;           // some negative real part was set to 0
};

// Roots of x^k - e_1 x^(k-1) + ... + (-1)^k e_k from the companion matrix.
RootEstimate eigenvalues_from_elementary(const std::vector<double>& elementary);

enum class CombineStrategy { kAverage, kStack, kPerObservation };

// Observations of D + sigma X, ready to be deconvolved with a sum map on
// n x N amplitudes and noise level sigma2.
struct PreparedObservations {
  std::vector<Matrix> matrices;
  long n = 0;
  long N = 0;
  Rational sigma2;
  CombineStrategy strategy = CombineStrategy::kAverage;
};

// average: one matrix, sigma2 / L. stack: one n x (N L) matrix. per
// observation: all matrices, moments averaged later.
PreparedObservations combine_observations(const std::vector<Matrix>& observations, const Rational& sigma2,
                                          CombineStrategy strategy);

// Mean mixed moments of (1/N) Y Y^H over the prepared matrices, deconvolved
// through the sum map; estimates the moments of (1/N) D D^H.
MomentVector estimate_signal_moments(const PreparedObservations& prepared, int max_weight);

struct SpectralEstimate {
  MomentVector moments;
  std::vector<double> elementary_symmetric;
  int rank_cap = 0;
  RootEstimate eigenvalues;
};

SpectralEstimate spectral_estimate(const MomentVector& moments, int rank_cap, long n);

enum class RateScale {
  kGram,       // eigenvalues of D D^H: prod(1 + rho N lambda_i)
  kNormalized, // eigenvalues of (1/N) D D^H: prod(1 + rho lambda_i)
};

struct RatePipelineResult {
  SpectralEstimate spectrum;
  RateEstimate rate;
};

RatePipelineResult rate_pipeline(const std::vector<Matrix>& observations, const Rational& sigma2, double snr,
                                 int rank, CombineStrategy strategy, RateScale scale = RateScale::kGram);

// The compound-observation power model Y = W P^(1/2) S + sigma X with W
// N x K, S K x M and Y N x M, written in the model language.
ModelExpr power_model(long K, long N, long M, const Rational& sigma);

// Moment estimates of P averaged over the observations, then eigenvalues
// with rank cap K.
SpectralEstimate power_estimation(const std::vector<Matrix>& observations, long K, long N, long M,
                                  const Rational& sigma, int max_weight);

}  // namespace gaussmom
