#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "gaussmom/estimators.hpp"
#include "gaussmom/mc_oracle.hpp"

using namespace gaussmom;

namespace {

// z_lambda = prod_i i^(m_i) m_i!
Rational z_lambda(const MomentKey& key) {
  std::map<int, int> mult;
  for (int p : key.parts()) ++mult[p];
  Rational z = 1;
  for (auto [part, m] : mult)
    for (int j = 1; j <= m; ++j) z *= part * j;
  return z;
}

MomentVector spectrum_moments(const std::vector<double>& eig, int P) {
  return eval_mixed_moments(std::span<const double>(eig), P);
}

}  // namespace

TEST(NewtonGirard, CoefficientsMatchCentralizerSizes) {
  for (long n : {1L, 2L, 5L})
    for (int r = 1; r <= 6; ++r) {
      auto coeffs = newton_girard_coefficients(r, n);
      EXPECT_EQ(static_cast<long>(coeffs.size()), partition_count(r));
      for (const auto& [key, a] : coeffs) {
        Rational expected = pow(Rational(n), key.length()) / z_lambda(key);
        if ((r - key.length()) % 2 == 1) expected = -expected;
        EXPECT_EQ(a, expected) << key.to_string();
      }
    }
}

TEST(Elementary, FromExactMoments) {
  auto e = elementary_from_moments(spectrum_moments({1.0, 0.5}, 2), 2, 2);
  EXPECT_NEAR(e[0], 1.5, 1e-14);
  EXPECT_NEAR(e[1], 0.5, 1e-14);
  auto id = elementary_from_moments(spectrum_moments({1.0, 1.0}, 2), 2, 2);
  EXPECT_NEAR(id[0], 2.0, 1e-14);
  EXPECT_NEAR(id[1], 1.0, 1e-14);
  auto one = elementary_from_moments(spectrum_moments({0.3, 0.2, 0.1}, 1), 1, 3);
  EXPECT_NEAR(one[0], 3 * 0.2, 1e-14);

  std::vector<Rational> eig{1, Rational(1, 2), Rational(1, 3)};
  auto exact = elementary_from_moments_exact(eval_mixed_moments(std::span<const Rational>(eig), 3), 3, 3);
  EXPECT_EQ(exact[0], Rational(11, 6));
  EXPECT_EQ(exact[1], Rational(1, 2) + Rational(1, 3) + Rational(1, 6));
  EXPECT_EQ(exact[2], Rational(1, 6));
}

TEST(Elementary, InsufficientWeight) {
  EXPECT_THROW(elementary_from_moments(spectrum_moments({1.0, 0.5}, 1), 2, 2), std::invalid_argument);
}

TEST(Elementary, RandomSpectraConsistency) {
  RandomStream rng(21, 0);
  for (int k = 1; k <= 5; ++k)
    for (int t = 0; t < 20; ++t) {
      std::vector<double> eig;
      for (int i = 0; i < k; ++i) eig.push_back(rng.uniform() * 2.0);
      auto from_moments = elementary_from_moments(spectrum_moments(eig, k), k, k);
      auto direct = elementary_from_spectrum(eig, k);
      for (int r = 0; r < k; ++r)
        EXPECT_NEAR(from_moments[static_cast<std::size_t>(r)], direct[static_cast<std::size_t>(r)],
                    1e-10 * std::max(1.0, std::abs(direct[static_cast<std::size_t>(r)])));
    }
}

TEST(Elementary, SymmetricInEigenvalueOrder) {
  auto a = elementary_from_moments(spectrum_moments({0.2, 1.7, 0.9}, 3), 3, 3);
  auto b = elementary_from_moments(spectrum_moments({1.7, 0.9, 0.2}, 3), 3, 3);
  for (int r = 0; r < 3; ++r) EXPECT_NEAR(a[static_cast<std::size_t>(r)], b[static_cast<std::size_t>(r)], 1e-13);
}

TEST(Rate, CoreAndRate) {
  // Eigenvalues of D D^H for D = diag(1, 0.5).
  auto e = elementary_from_spectrum({1.0, 0.25}, 2);
  EXPECT_NEAR(rate_core_estimate(e, 5.0), 13.5, 1e-12);
  RateEstimate r = rate(e, 5.0, 2);
  ASSERT_TRUE(r.rate.has_value());
  EXPECT_NEAR(*r.rate, 0.5 * std::log2(13.5), 1e-12);

  // The same through the moments of (1/N) D D^H with N = 2.
  auto scaled = elementary_from_moments(spectrum_moments({0.5, 0.125}, 2), 2, 2);
  EXPECT_NEAR(rate_core_estimate(scaled, 5.0, 2.0), 13.5, 1e-12);

  RateEstimate zero = rate(elementary_from_spectrum({0.0, 0.0}, 2), 5.0, 2);
  EXPECT_DOUBLE_EQ(zero.core, 1.0);
  EXPECT_DOUBLE_EQ(*zero.rate, 0.0);

  // D = diag(1, 0.5, 2, 1), rho = 10: eigenvalues of D D^H are 1, 0.25, 4, 1.
  auto e4 = elementary_from_spectrum({1.0, 0.25, 4.0, 1.0}, 4);
  EXPECT_NEAR(rate_core_estimate(e4, 10.0), 11.0 * 3.5 * 41.0 * 11.0, 1e-9);

  RateEstimate negative = rate({-1.0}, 2.0, 1);
  EXPECT_LT(negative.core, 0.0);
  EXPECT_FALSE(negative.rate.has_value());
  EXPECT_THROW(rate_core_estimate({1.0}, 0.0), std::invalid_argument);
}

TEST(Roots, RecoverSpectrum) {
  RootEstimate r = eigenvalues_from_elementary({1.5, 0.5});
  ASSERT_EQ(r.values.size(), 2u);
  EXPECT_NEAR(r.values[0], 1.0, 1e-12);
  EXPECT_NEAR(r.values[1], 0.5, 1e-12);
  EXPECT_FALSE(r.complex_discarded);
  EXPECT_FALSE(r.clamped);

  RootEstimate ones = eigenvalues_from_elementary({3.0, 3.0, 1.0});
  for (double v : ones.values) EXPECT_NEAR(v, 1.0, 1e-4);
}

TEST(Roots, ComplexPairIsProjected) {
  RootEstimate r = eigenvalues_from_elementary({1.0, 1.0});  // x^2 - x + 1
  EXPECT_TRUE(r.complex_discarded);
  for (double v : r.values) EXPECT_NEAR(v, 0.5, 1e-12);
}

TEST(Roots, NegativeRootsAreClamped) {
  RootEstimate r = eigenvalues_from_elementary({0.5, -0.5});  // (x - 1)(x + 0.5)
  EXPECT_TRUE(r.clamped);
  EXPECT_NEAR(r.values[0], 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(r.values[1], 0.0);
}

TEST(Roots, InvertElementaryOnSeparatedSpectra) {
  RandomStream rng(8, 0);
  for (int k = 1; k <= 5; ++k)
    for (int t = 0; t < 10; ++t) {
      std::vector<double> eig;
      for (int i = 0; i < k; ++i) eig.push_back(0.5 + i + 0.3 * rng.uniform());
      RootEstimate r = eigenvalues_from_elementary(elementary_from_spectrum(eig, k));
      std::sort(eig.begin(), eig.end(), std::greater<>());
      for (int i = 0; i < k; ++i)
        EXPECT_NEAR(r.values[static_cast<std::size_t>(i)], eig[static_cast<std::size_t>(i)], 1e-8);
    }
}

TEST(Combine, Strategies) {
  Matrix D = diagonal_matrix({1.0, 0.5});
  std::vector<Matrix> copies(4, D);
  PreparedObservations avg = combine_observations(copies, Rational(1, 5), CombineStrategy::kAverage);
  ASSERT_EQ(avg.matrices.size(), 1u);
  EXPECT_TRUE(avg.matrices[0].isApprox(D));
  EXPECT_EQ(avg.sigma2, Rational(1, 20));

  std::vector<Matrix> columns;
  for (int i = 0; i < 3; ++i) columns.push_back(Matrix::Constant(2, 1, Complex(i, 0)));
  PreparedObservations stacked = combine_observations(columns, 1, CombineStrategy::kStack);
  ASSERT_EQ(stacked.matrices.size(), 1u);
  EXPECT_EQ(stacked.matrices[0].cols(), 3);
  EXPECT_EQ(stacked.N, 3);
  EXPECT_EQ(stacked.matrices[0](1, 2), Complex(2, 0));

  PreparedObservations per = combine_observations(copies, 1, CombineStrategy::kPerObservation);
  EXPECT_EQ(per.matrices.size(), 4u);
  EXPECT_THROW(combine_observations({}, 1, CombineStrategy::kAverage), std::invalid_argument);
  EXPECT_THROW(combine_observations({D, Matrix(Matrix::Zero(3, 2))}, 1, CombineStrategy::kAverage), ModelError);
}

TEST(Combine, SingleObservationStrategiesCoincide) {
  Matrix y(2, 2);
  y << Complex(1.1, 0.2), Complex(0.1, -0.3), Complex(-0.2, 0.1), Complex(0.6, 0.05);
  std::vector<double> ref;
  for (auto s : {CombineStrategy::kAverage, CombineStrategy::kStack, CombineStrategy::kPerObservation}) {
    auto v = estimate_signal_moments(combine_observations({y}, Rational(1, 5), s), 2).values();
    if (ref.empty()) ref = v;
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(v[i], ref[i], 1e-12);
  }
}

TEST(RatePipeline, NoiselessObservationsGiveExactCore) {
  Matrix D = diagonal_matrix({1.0, 0.5});
  auto result = rate_pipeline({D, D, D}, Rational(0), 5.0, 2, CombineStrategy::kAverage);
  EXPECT_NEAR(result.rate.core, 13.5, 1e-10);
  auto normalized = rate_pipeline({D}, Rational(0), 5.0, 2, CombineStrategy::kAverage, RateScale::kNormalized);
  EXPECT_NEAR(normalized.rate.core, (1 + 2.5) * (1 + 0.625), 1e-10);
}

TEST(RatePipeline, CoreIsUnbiased) {
  Matrix D = diagonal_matrix({1.0, 0.5});
  EmpiricalMoments mc = monte_carlo_mean(Basis::one_sided(0), 4000, 31, [&](RandomStream& rng) {
    std::vector<Matrix> obs;
    for (int l = 0; l < 2; ++l) obs.push_back(D + sample_complex_gaussian(2, 2, rng) * std::sqrt(0.2));
    return std::vector<double>{rate_pipeline(obs, Rational(1, 5), 5.0, 2, CombineStrategy::kAverage).rate.core};
  });
  EXPECT_LE(std::abs(mc.mean[0] - 13.5), 4 * mc.std_error[0]);
}

TEST(PowerEstimation, ScalarModel) {
  Matrix y(1, 1);
  y << Complex(0.9, -0.7);
  SpectralEstimate s = power_estimation({y}, 1, 1, 1, Rational(1, 2), 1);
  EXPECT_NEAR(s.elementary_symmetric[0], std::norm(y(0, 0)) - 0.25, 1e-12);
}

TEST(PowerEstimation, NoiselessWeightOne) {
  // Every weight-1 row is an identity apart from the factor K.
  RandomStream rng(4, 0);
  Matrix y = sample_complex_gaussian(2, 2, rng);
  SpectralEstimate s = power_estimation({y}, 2, 2, 2, Rational(0), 2);
  double tr = (y * y.adjoint()).trace().real() / 2.0 / 2.0;
  EXPECT_NEAR(s.moments.value(MomentKey({1})), tr / 2.0, 1e-12);
}

TEST(PowerEstimation, ModelTextForm) {
  EXPECT_EQ(render_model(power_model(2, 3, 4, Rational(1, 10))),
            "sum(scale(wprod(det(I, 3x3), wprod(det(P, 2x2), det(I, 4x4), 2, 4), 3, 2), 2), gC(3, 4, 0.1))");
}
