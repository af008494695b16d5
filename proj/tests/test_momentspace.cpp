#include <gtest/gtest.h>

#include <sstream>

#include "gaussmom/moment_space.hpp"

using namespace gaussmom;

namespace {

// Partition numbers by the recurrence over the largest allowed part.
long count_partitions(int n, int largest) {
  if (n == 0) return 1;
  long total = 0;
  for (int k = std::min(n, largest); k >= 1; --k) total += count_partitions(n - k, k);
  return total;
}

}  // namespace

TEST(MomentKey, SortsPartsAndPrints) {
  MomentKey k({1, 3, 1});
  EXPECT_EQ(k.parts(), (std::vector<int>{3, 1, 1}));
  EXPECT_EQ(k.weight(), 5);
  EXPECT_EQ(k.length(), 3);
  EXPECT_EQ(k.to_string(), "3,1,1");
  EXPECT_EQ(MomentKey().to_string(), "-");
  EXPECT_EQ(MomentKey::parse("2,1"), MomentKey({2, 1}));
  EXPECT_EQ(MomentKey::parse("-"), MomentKey());
  EXPECT_THROW(MomentKey::parse("2,0"), std::invalid_argument);
  EXPECT_THROW(MomentKey::parse("x"), std::invalid_argument);
}

TEST(MomentKey, CanonicalOrder) {
  EXPECT_LT(MomentKey({3}), MomentKey({2, 1}));
  EXPECT_LT(MomentKey({2, 1}), MomentKey({1, 1, 1}));
  EXPECT_LT(MomentKey({1, 1}), MomentKey({3}));
  EXPECT_LT(MomentKey(), MomentKey({1}));
}

TEST(Basis, SizesFollowPartitionNumbers) {
  for (int w = 1; w <= 8; ++w) EXPECT_EQ(partition_count(w), count_partitions(w, w));
  for (int P = 0; P <= 6; ++P) {
    long expected = 0;
    for (int w = 0; w <= P; ++w) expected += count_partitions(w, w);
    EXPECT_EQ(static_cast<long>(Basis::one_sided(P).size()), expected);
    EXPECT_EQ(static_cast<long>(Basis::two_sided(P).size()), expected * expected);
  }
}

TEST(Basis, OneSidedOrder) {
  Basis b = Basis::one_sided(3);
  std::vector<std::string> keys;
  for (std::size_t i = 0; i < b.size(); ++i) keys.push_back(b.key(i).to_string());
  EXPECT_EQ(keys, (std::vector<std::string>{"-", "1", "2", "1,1", "3", "2,1", "1,1,1"}));
  EXPECT_EQ(b.index_of(MomentKey({2, 1})), 5u);
  EXPECT_EQ(b.weight_block(2), (std::vector<std::size_t>{2, 3}));
  EXPECT_THROW(b.index_of(MomentKey({4})), std::out_of_range);
}

TEST(Basis, TwoSidedKeys) {
  Basis b = Basis::two_sided(1);
  ASSERT_EQ(b.size(), 4u);
  EXPECT_EQ(b[1].to_string(true), "1|-");
  EXPECT_EQ(b[2].to_string(true), "-|1");
}

TEST(MomentVector, TextRoundTripExact) {
  Basis b = Basis::one_sided(3);
  std::vector<Rational> v;
  for (std::size_t i = 0; i < b.size(); ++i) v.push_back(Rational(static_cast<long>(i * i + 1), 7));
  MomentVector m = MomentVector::exact(b, v);
  std::stringstream s;
  write_moment_vector(s, m);
  MomentVector back = read_moment_vector(s);
  ASSERT_TRUE(back.is_exact());
  EXPECT_EQ(back.exact_values(), v);
}

TEST(MomentVector, TextRoundTripApproximate) {
  Basis b = Basis::one_sided(2);
  MomentVector m = MomentVector::approximate(b, {1.0, 0.1, 1.0 / 3.0, 2.0});
  std::stringstream s;
  write_moment_vector(s, m);
  MomentVector back = read_moment_vector(s);
  EXPECT_FALSE(back.is_exact());
  EXPECT_EQ(back.values(), m.values());
}

TEST(MomentVector, TwoSidedRoundTrip) {
  Basis b = Basis::two_sided(1);
  MomentVector m = MomentVector::exact(b, {1, Rational(1, 2), 3, 4});
  std::stringstream s;
  write_moment_vector(s, m);
  MomentVector back = read_moment_vector(s);
  EXPECT_TRUE(back.basis().two_sided_basis());
  EXPECT_EQ(back.exact_values(), m.exact_values());
}

TEST(MomentVector, ReadErrors) {
  std::istringstream missing("- 1\n2 1\n");
  EXPECT_THROW(read_moment_vector(missing), FormatError);
  std::istringstream bad_value("- 1\n1 abc\n");
  EXPECT_THROW(read_moment_vector(bad_value), FormatError);
  std::istringstream mixed("- 1\n1 1\n-|1 2\n1|1 1\n");
  EXPECT_THROW(read_moment_vector(mixed), FormatError);
  std::istringstream empty("# nothing\n");
  EXPECT_THROW(read_moment_vector(empty), FormatError);
}

TEST(MomentVector, JsonRoundTrip) {
  Basis b = Basis::one_sided(2);
  MomentVector exact = MomentVector::exact(b, {1, Rational(3, 2), 2, Rational(-1, 3)});
  EXPECT_EQ(moment_vector_from_json(moment_vector_to_json(exact)).exact_values(), exact.exact_values());
  MomentVector approx = MomentVector::approximate(b, {1.0, 0.5, 0.25, 0.125});
  EXPECT_EQ(moment_vector_from_json(moment_vector_to_json(approx)).values(), approx.values());
  EXPECT_THROW(moment_vector_from_json("{"), FormatError);
}

TEST(MomentVector, ExactAccessOnApproximateThrows) {
  MomentVector m = MomentVector::approximate(Basis::one_sided(1), {1.0, 2.0});
  EXPECT_THROW(m.exact_value(0), std::logic_error);
}

TEST(EvalMixedMoments, MatchesEigenvalues) {
  Matrix a = diagonal_matrix({1.0, 0.5});
  MomentVector m = eval_mixed_moments(a, 3);
  EXPECT_DOUBLE_EQ(m.value(MomentKey({1})), 0.75);
  EXPECT_DOUBLE_EQ(m.value(MomentKey({2})), 0.625);
  EXPECT_DOUBLE_EQ(m.value(MomentKey({1, 1})), 0.5625);
  EXPECT_DOUBLE_EQ(m.value(MomentKey({2, 1})), 0.625 * 0.75);

  std::vector<Rational> eig{1, Rational(1, 2)};
  MomentVector exact = eval_mixed_moments(std::span<const Rational>(eig), 3);
  EXPECT_EQ(exact.exact_value(MomentKey({3})), Rational(9, 16));
}

TEST(EvalMixedMoments, UnitaryInvariance) {
  Matrix a(2, 2);
  a << Complex(2, 0), Complex(1, 1), Complex(1, -1), Complex(3, 0);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
  std::vector<double> values{eig.eigenvalues()(0), eig.eigenvalues()(1)};
  MomentVector direct = eval_mixed_moments(a, 4);
  MomentVector spectral = eval_mixed_moments(std::span<const double>(values), 4);
  for (std::size_t i = 0; i < direct.size(); ++i) EXPECT_NEAR(direct.value(i), spectral.value(i), 1e-10);
}

TEST(EvalMixedMoments, TwoSidedProducts) {
  Matrix r = diagonal_matrix({1.0, 0.0});
  Matrix s = diagonal_matrix({2.0, 2.0, 2.0});
  MomentVector m = eval_mixed_moments(r, s, 1);
  EXPECT_DOUBLE_EQ(m.value(PairMomentKey{MomentKey({1}), MomentKey({1})}), 0.5 * 2.0);
}

TEST(DRho, MultipliesWithinBlocks) {
  DetMatrixSet set;
  set.add("A", diagonal_matrix({1.0, 2.0}));
  set.add("B", diagonal_matrix({3.0, 5.0}));
  std::vector<std::string> word{"A", "B", "A"};
  SetPartition together(3, {{1, 2, 3}});
  EXPECT_NEAR(d_rho(set, together, word).real(), (3.0 + 20.0) / 2.0, 1e-12);
  SetPartition apart(3, {{1, 3}, {2}});
  EXPECT_NEAR(d_rho(set, apart, word).real(), (1.0 + 4.0) / 2.0 * 4.0, 1e-12);
  std::vector<std::string> missing{"A", "C", "A"};
  EXPECT_THROW(d_rho(set, together, missing), std::invalid_argument);
}

TEST(MatrixIO, RoundTripAndShorthand) {
  Matrix a(2, 3);
  a << Complex(1, 2), Complex(0.5, 0), Complex(-1, 0.25), Complex(0, 0), Complex(3, -3), Complex(1e-3, 7);
  std::stringstream s;
  write_matrix(s, a);
  EXPECT_EQ(read_matrix(s), a);
  EXPECT_EQ(matrix_from_spec("eye:3"), Matrix(Matrix::Identity(3, 3)));
  EXPECT_EQ(matrix_from_spec("diag:1,0.5"), diagonal_matrix({1.0, 0.5}));
  std::istringstream bad("2 2 complex\n1 0 2 0\n");
  EXPECT_THROW(read_matrix(bad), FormatError);
}
