#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "gaussmom/transfer.hpp"

using namespace gaussmom;

namespace {

CoeffPoly P(const char* text) { return parse_coeff_poly(text); }

MomentKey K(std::initializer_list<int> parts) { return MomentKey(std::vector<int>(parts)); }

MomentVector unit_moments(const Basis& basis) {
  return MomentVector::exact(basis, std::vector<Rational>(basis.size(), Rational(1)));
}

MomentVector empty_moments(int P) {
  Basis b = Basis::one_sided(P);
  std::vector<Rational> v(b.size(), Rational(0));
  v[0] = 1;
  return MomentVector::exact(b, v);
}

long factorial(int p) { return p <= 1 ? 1 : p * factorial(p - 1); }

}  // namespace

TEST(WishartProduct, WeightTwoMatrix) {
  TransferMap m = wishart_product_transfer(2, 4, 2);
  EXPECT_EQ(m.entry(K({1}), K({1})), P("1"));
  EXPECT_EQ(m.entry(K({2}), K({2})), P("1"));
  EXPECT_EQ(m.entry(K({2}), K({1, 1})), P("c"));
  EXPECT_EQ(m.entry(K({1, 1}), K({2})), P("1/(cN^2)"));
  EXPECT_EQ(m.entry(K({1, 1}), K({1, 1})), P("1"));
  EXPECT_TRUE(m.preserves_weight());
}

TEST(WishartProduct, WeightThreeMatrix) {
  TransferMap m = wishart_product_transfer(3, 5, 3);
  EXPECT_EQ(m.entry(K({3}), K({3})), P("1+1/N^2"));
  EXPECT_EQ(m.entry(K({3}), K({2, 1})), P("3c"));
  EXPECT_EQ(m.entry(K({3}), K({1, 1, 1})), P("c^2"));
  EXPECT_EQ(m.entry(K({2, 1}), K({3})), P("2/(cN^2)"));
  EXPECT_EQ(m.entry(K({2, 1}), K({2, 1})), P("1+2/N^2"));
  EXPECT_EQ(m.entry(K({2, 1}), K({1, 1, 1})), P("c"));
  EXPECT_EQ(m.entry(K({1, 1, 1}), K({3})), P("2/(c^2N^4)"));
  EXPECT_EQ(m.entry(K({1, 1, 1}), K({2, 1})), P("3/(cN^2)"));
  EXPECT_EQ(m.entry(K({1, 1, 1}), K({1, 1, 1})), P("1"));
}

TEST(WishartProduct, ScalarCaseIsFactorial) {
  for (int p = 1; p <= 6; ++p) {
    TransferMap m = wishart_product_transfer(1, 1, p);
    Rational moment = m.evaluated().apply(unit_moments(m.input_basis())).exact_value(K({p}));
    EXPECT_EQ(moment, Rational(factorial(p))) << "p=" << p;
  }
}

TEST(WishartProduct, AgreesWithTraceFormula) {
  // Rows of the one-sided map at R = diag(1, 1/2) against the direct sum
  // over permutations with E = I.
  std::vector<Rational> d{1, Rational(3, 4), Rational(5, 8), Rational(9, 16), Rational(17, 32)};
  std::vector<Rational> e(5, Rational(1));
  std::vector<Rational> eig{1, Rational(1, 2)};
  for (long N : {1L, 2L, 3L}) {
    TransferMap m = wishart_product_transfer(2, N, 4).with_dims({2, N});
    MomentVector out = m.apply(eval_mixed_moments(std::span<const Rational>(eig), 4));
    for (int p = 1; p <= 4; ++p)
      EXPECT_EQ(out.exact_value(K({p})), corr_wishart_moment(d, e, 2, N, p)) << "N=" << N << " p=" << p;
  }
}

TEST(WishartProduct, TraceAndMatrixFormsAgree) {
  Matrix dm = diagonal_matrix({1.0, 0.5});
  Matrix em = diagonal_matrix({2.0, 1.0, 0.25});
  std::vector<Rational> d{1, Rational(3, 4), Rational(5, 8), Rational(9, 16)};
  std::vector<Rational> e{1, Rational(13, 12), Rational(81, 48), Rational(577, 192)};
  for (int p = 1; p <= 3; ++p)
    EXPECT_NEAR(corr_wishart_moment(dm, em, p).real(), to_double(corr_wishart_moment(d, e, 2, 3, p)), 1e-12);
}

TEST(WishartProduct, TwoSidedReducesToOneSided) {
  // Folding S = I into the two-sided map gives the one-sided map.
  TransferMap both = wishart_product_transfer(2, 3, 3, WishartInput::kBoth);
  TransferMap folded = fold_side(both, WishartInput::kS, unit_moments(Basis::one_sided(3)));
  TransferMap one = wishart_product_transfer(2, 3, 3, WishartInput::kR);
  EXPECT_EQ(folded.evaluate(), one.evaluate());
  TransferMap s_side = wishart_product_transfer(2, 3, 3, WishartInput::kS);
  TransferMap folded_r = fold_side(both, WishartInput::kR, unit_moments(Basis::one_sided(3)));
  EXPECT_EQ(folded_r.evaluate(), s_side.evaluate());
}

TEST(GaussSum, LowOrderFormulas) {
  TransferMap m = gauss_sum_transfer(2, 3, 4);
  EXPECT_EQ(m.entry(K({1}), K({1})), P("1"));
  EXPECT_EQ(m.entry(K({1}), K({})), P("1"));
  EXPECT_EQ(m.entry(K({2}), K({1})), P("2+2c"));
  EXPECT_EQ(m.entry(K({2}), K({})), P("1+c"));
  EXPECT_EQ(m.entry(K({3}), K({2})), P("3+3c"));
  EXPECT_EQ(m.entry(K({3}), K({1, 1})), P("3c"));
  EXPECT_EQ(m.entry(K({3}), K({1})), P("3+9c+3c^2+3/N^2"));
  EXPECT_EQ(m.entry(K({3}), K({})), P("1+3c+c^2+1/N^2"));
  EXPECT_EQ(m.entry(K({4}), K({3})), P("4+4c"));
  EXPECT_EQ(m.entry(K({4}), K({2, 1})), P("8c"));
  EXPECT_EQ(m.entry(K({4}), K({2})), P("6+16c+6c^2+16/N^2"));
  EXPECT_EQ(m.entry(K({4}), K({1, 1})), P("14c+14c^2"));
  EXPECT_EQ(m.entry(K({4}), K({1})), P("4+24c+24c^2+4c^3+(20+20c)/N^2"));
  EXPECT_EQ(m.entry(K({4}), K({})), P("1+6c+6c^2+c^3+(5+5c)/N^2"));
  EXPECT_TRUE(m.is_weight_triangular());
  EXPECT_FALSE(m.preserves_weight());
}

TEST(GaussSum, ZeroSignalMatchesWishart) {
  for (long n = 1; n <= 3; ++n)
    for (long N = 1; N <= 3; ++N) {
      MomentVector out = gauss_sum_transfer(n, N, 4).with_dims({n, N}).apply(empty_moments(4));
      std::vector<Rational> ones(5, Rational(1));
      for (int p = 1; p <= 4; ++p) EXPECT_EQ(out.exact_value(K({p})), corr_wishart_moment(ones, ones, n, N, p));
    }
}

TEST(GaussSum, NoiseVarianceScalesPairings) {
  // M_1 = D_1 + sigma^2, M_2 = D_2 + (2+2c) sigma^2 D_1 + (1+c) sigma^4.
  TransferMap m = gauss_sum_transfer(2, 2, 2, Rational(1, 4));
  EXPECT_EQ(m.entry(K({1}), K({})), P("1/4"));
  EXPECT_EQ(m.entry(K({2}), K({1})), P("2+2c") * Rational(1, 4));
  EXPECT_EQ(m.entry(K({2}), K({})), P("1+c") * Rational(1, 16));
}

TEST(SelfAdjointProduct, WeightTwoMatrix) {
  TransferMap m = selfadj_product_transfer(3, 2);
  EXPECT_TRUE(m.entry(K({1}), K({1})).is_zero());
  EXPECT_TRUE(m.entry(K({2}), K({2})).is_zero());
  EXPECT_EQ(m.entry(K({2}), K({1, 1})), P("1"));
  EXPECT_EQ(m.entry(K({1, 1}), K({2})), CoeffPoly::monomial(1, -2, 0));
  EXPECT_TRUE(m.entry(K({1, 1}), K({1, 1})).is_zero());
}

TEST(SelfAdjointProduct, OddWeightsVanish) {
  TransferMap m = selfadj_product_transfer(2, 4);
  for (auto key : {K({1}), K({3}), K({2, 1}), K({1, 1, 1})})
    for (std::size_t j = 0; j < m.cols(); ++j) EXPECT_TRUE(m.entry(m.output_basis().index_of(key), j).is_zero());
}

TEST(SelfAdjointProduct, WeightFourAtIdentityMatchesGue) {
  // With R = I the rows sum to GUE moments: E tr(X^4)/n^2 = 2 + 1/n^2,
  // E [tr(X^2)/n]^2 = 1 + 2/n^2, E tr(X^2) tr(X)^2 / n^4 = 1/n^2 + 2/n^4,
  // E tr(X^3) tr(X) / n^3 = 3/n^2, E [tr(X)/sqrt(n)]^4 / n^2 = 3/n^4.
  TransferMap m = selfadj_product_transfer(2, 4);
  auto row_sum = [&](MomentKey key) {
    CoeffPoly s;
    for (std::size_t j = 0; j < m.cols(); ++j) s += m.entry(m.output_basis().index_of(key), j);
    return s;
  };
  EXPECT_EQ(row_sum(K({4})), P("2+1/n^2"));
  EXPECT_EQ(row_sum(K({2, 2})), P("1+2/n^2"));
  EXPECT_EQ(row_sum(K({3, 1})), P("3/n^2"));
  EXPECT_EQ(row_sum(K({2, 1, 1})), P("1/n^2+2/n^4"));
  EXPECT_EQ(row_sum(K({1, 1, 1, 1})), P("3/n^4"));
}

TEST(SelfAdjointSum, LowOrderFormulas) {
  TransferMap m = selfadj_sum_transfer(2, 4);
  EXPECT_EQ(m.entry(K({1}), K({1})), P("1"));
  EXPECT_TRUE(m.entry(K({1}), K({})).is_zero());
  EXPECT_EQ(m.entry(K({2}), K({})), P("1"));
  EXPECT_EQ(m.entry(K({3}), K({1})), P("3"));
  EXPECT_EQ(m.entry(K({4}), K({2})), P("4"));
  EXPECT_EQ(m.entry(K({4}), K({1, 1})), P("2"));
  EXPECT_EQ(m.entry(K({4}), K({})), P("2+1/n^2"));
}

TEST(SelfAdjointSum, ScalarCaseIsDoubleFactorial) {
  TransferMap m = selfadj_sum_transfer(1, 6).with_dims({1, 0});
  MomentVector out = m.apply(empty_moments(6));
  long df = 1;
  for (int k = 1; 2 * k <= 6; ++k) {
    df *= 2 * k - 1;
    EXPECT_EQ(out.exact_value(K({2 * k})), Rational(df));
    EXPECT_EQ(out.exact_value(K({2 * k - 1})), Rational(0));
  }
}

TEST(Compose, ChainOfWishartStages) {
  TransferMap a = wishart_product_transfer(2, 3, 3);
  TransferMap b = wishart_product_transfer(2, 3, 3);
  TransferMap ab = compose(a, b);
  EXPECT_EQ(ab.evaluate(), a.evaluate() * b.evaluate());
  TransferMap c = wishart_product_transfer(2, 5, 3);
  EXPECT_EQ(compose(c, a).evaluate(), c.evaluate() * a.evaluate());
}

TEST(Compose, ScaleAndConstant) {
  TransferMap s = scale_transfer(2, Rational(3));
  MomentVector v = unit_moments(Basis::one_sided(2));
  MomentVector out = s.apply(v);
  EXPECT_EQ(out.exact_value(K({2})), Rational(9));
  EXPECT_EQ(out.exact_value(K({1, 1})), Rational(9));
  TransferMap c = constant_transfer(out, Basis::one_sided(2));
  EXPECT_EQ(c.apply(empty_moments(2)).exact_values(), out.exact_values());
}

TEST(Evaluate, UnboundDimensionThrows) {
  TransferMap m = wishart_product_transfer(2, 3, 2).with_dims({});
  EXPECT_THROW(m.evaluate(), std::logic_error);
}

TEST(Formula, PlainMatrixLayout) {
  std::string text = emit_formula(wishart_product_transfer(2, 4, 2));
  EXPECT_EQ(text, "M_{1} = R_{1}\n[M_{2}; M_{1,1}] = [1, c; 1/(cN^2), 1] [R_{2}; R_{1,1}]\n");
}

TEST(Formula, ExpandedRows) {
  FormulaOptions o;
  std::string text = emit_formula(gauss_sum_transfer(2, 4, 2), o);
  EXPECT_NE(text.find("M_{2} = D_{2} + (2+2c)D_{1} + (1+c)"), std::string::npos);
}

TEST(Formula, RawStyleKeepsDimensions) {
  FormulaOptions o;
  o.style = RenderStyle::kRaw;
  std::string text = emit_row(wishart_product_transfer(2, 4, 2), 3, o);
  EXPECT_EQ(text.find('c'), std::string::npos);
}

TEST(Formula, ByteStable) {
  FormulaOptions o;
  o.format = RenderFormat::kLatex;
  clear_transfer_cache();
  std::string first = emit_formula(wishart_product_transfer(2, 4, 3), o);
  clear_transfer_cache();
  EXPECT_EQ(emit_formula(wishart_product_transfer(2, 4, 3), o), first);
}

TEST(Serialization, RoundTrip) {
  for (const TransferMap& m : {wishart_product_transfer(2, 3, 3), gauss_sum_transfer(2, 3, 3, Rational(1, 4)),
                               selfadj_sum_transfer(2, 3), wishart_product_transfer(2, 3, 2, WishartInput::kBoth)}) {
    std::stringstream s;
    write_transfer_map(s, m);
    TransferMap back = read_transfer_map(s);
    EXPECT_EQ(back.entries(), m.entries());
    EXPECT_EQ(back.input_basis(), m.input_basis());
    EXPECT_EQ(back.output_basis(), m.output_basis());
    EXPECT_EQ(back.theorem(), m.theorem());
    EXPECT_EQ(back.dims(), m.dims());
  }
  std::istringstream bad("theorem nonsense\n");
  EXPECT_THROW(read_transfer_map(bad), FormatError);
}

TEST(Cache, MemoizesAndUsesDiskDirectory) {
  auto dir = std::filesystem::temp_directory_path() / "gaussmom_cache_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  setenv("GAUSSMOM_CACHE_DIR", dir.c_str(), 1);
  clear_transfer_cache();
  TransferMap a = wishart_product_transfer(2, 3, 3);
  EXPECT_GE(transfer_cache_size(), 1u);
  EXPECT_FALSE(std::filesystem::is_empty(dir));
  clear_transfer_cache();
  TransferMap b = wishart_product_transfer(2, 3, 3);
  EXPECT_EQ(a.entries(), b.entries());
  unsetenv("GAUSSMOM_CACHE_DIR");
  std::filesystem::remove_all(dir);
  clear_transfer_cache();
}

TEST(Threads, ResultsIndependentOfThreadCount) {
  set_thread_count(1);
  clear_transfer_cache();
  TransferMap one = gauss_sum_transfer(2, 3, 4);
  set_thread_count(4);
  clear_transfer_cache();
  TransferMap four = gauss_sum_transfer(2, 3, 4);
  set_thread_count(0);
  EXPECT_EQ(one.entries(), four.entries());
}

TEST(Threads, ParallelForVisitsEveryIndex) {
  set_thread_count(3);
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  set_thread_count(0);
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, [](std::size_t i) {
                 if (i == 7) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}

TEST(TheoremNames, RoundTrip) {
  for (auto id : {TheoremId::kIdentity, TheoremId::kWishartProduct, TheoremId::kGaussSum,
                  TheoremId::kSelfAdjointProduct, TheoremId::kSelfAdjointSum, TheoremId::kScale, TheoremId::kConstant,
                  TheoremId::kComposite})
    EXPECT_EQ(theorem_from_name(theorem_name(id)), id);
  EXPECT_THROW(theorem_from_name("bogus"), std::invalid_argument);
}
