#include <gtest/gtest.h>

#include "gaussmom/model.hpp"

using namespace gaussmom;

namespace {

const std::vector<std::string> kCorpus = {
    "det(D,2x2)",
    "det(D, 3x5)",
    "det(I,4x4)",
    "det(0,2x2)",
    "gC(2,4)",
    "gC(2, 4, 0.5)",
    "gC(3,3,1/3)",
    "gSA(2)",
    "gSA(3, 0.25)",
    "sum(det(D,2x4), gC(2,4))",
    "sum(det(D,2x4), gC(2,4,0.5))",
    "sum(det(D,2x2), gC(2,2,2))",
    "sum(det(D,2x2), gSA(2))",
    "sum(det(D,2x2), gSA(2,0.5))",
    "wprod(det(R,2x2), det(I,4x4), 2, 4)",
    "wprod(det(R,2x2), det(S,3x3), 2, 3)",
    "wprod(det(I,2x2), det(S,3x3), 2, 3)",
    "wprod(det(R,3x3), det(I,1x1), 3, 1)",
    "wprod(det(R,2x6), det(I,3x3), 2, 3)",
    "chain(det(D,2x2), gC(2,4))",
    "chain(det(D,2x2), gC(2,4), gC(2,3))",
    "chain(det(D,2x2), gC(2,4,0.5), gC(2,3), gC(2,2,3))",
    "saprod(det(R,2x2), 2)",
    "saprod(det(I,3x3), 3)",
    "sasum(det(R,2x2), 2)",
    "sasum(det(0,1x1), 1)",
    "sasum(det(R,2x2), 2, 0.75)",
    "scale(det(D,2x2), 3)",
    "scale(det(D,2x2), -1/2)",
    "scale(wprod(det(R,2x2), det(I,4x4), 2, 4), 0.125)",
    "sum(scale(wprod(det(I,2x2), wprod(det(P,2x2), det(I,2x2), 2, 2), 2, 2), 2), gC(2,2,0.1))",
    "sum(wprod(det(I,2x2), det(R,2x2), 2, 2), gC(2,3,0.5))",
    "saprod(sasum(det(R,2x2), 2), 2)",
    "sasum(saprod(det(R,2x2), 2), 2, 2)",
    "chain(sum(det(D,2x3), gC(2,3)), gC(2,2))",
    "wprod(chain(det(D,2x2), gC(2,2)), det(I,3x3), 2, 3)",
    "  wprod ( det ( R , 2x2 ) , det ( I , 4X4 ) , 2 , 4 )  ",
    "scale(saprod(det(R,2x2),2), 2)",
};

template <typename E>
std::size_t error_position(const std::string& text) {
  try {
    parse_model(text);
  } catch (const E& e) {
    if constexpr (std::is_same_v<E, ModelSyntaxError>) return e.position();
    return 0;
  }
  ADD_FAILURE() << "no error for " << text;
  return 0;
}

}  // namespace

TEST(Dsl, CorpusRoundTrips) {
  ASSERT_GE(kCorpus.size(), 30u);
  for (const auto& text : kCorpus) {
    ModelExpr m = parse_model(text);
    std::string rendered = render_model(m);
    ModelExpr again = parse_model(rendered);
    EXPECT_EQ(again, m) << text << " -> " << rendered;
    EXPECT_EQ(render_model(again), rendered);
  }
}

TEST(Dsl, BuildsExpectedTrees) {
  ModelExpr m = parse_model("wprod(det(R,2x2), det(I,4x4), 2, 4)");
  EXPECT_EQ(m, corr_product(det("R", 2, 2), det("I", 4, 4), 2, 4));
  ModelExpr c = parse_model("chain(det(D,2x2), gC(2,4), gC(2,3))");
  EXPECT_EQ(c, chain(det("D", 2, 2), {gauss_complex(2, 4), gauss_complex(2, 3)}));
  ModelExpr s = parse_model("sum(det(D,2x4), gC(2,4,0.5))");
  EXPECT_EQ(s.kind, NodeKind::kGaussSum);
  EXPECT_EQ(s.sigma, Rational(1, 2));
  EXPECT_EQ(parse_model("sum(det(D,2x2), gSA(2,0.5))"), selfadj_sum(det("D", 2, 2), 2, Rational(1, 2)));
}

TEST(Dsl, RendersNumbers) {
  EXPECT_EQ(render_model(parse_model("gC(2,4,1/2)")), "gC(2, 4, 0.5)");
  EXPECT_EQ(render_model(parse_model("gC(2,4,1/3)")), "gC(2, 4, 1/3)");
  EXPECT_EQ(render_model(parse_model("gC(2,4,1)")), "gC(2, 4)");
  EXPECT_EQ(render_model(parse_model("scale(det(D,1x1), -0.05)")), "scale(det(D, 1x1), -0.05)");
}

TEST(Dsl, SyntaxErrorsCarryPositions) {
  EXPECT_EQ(error_position<ModelSyntaxError>("wprod(det(R,2x2) det(I,2x2), 2, 2)"), 17u);
  EXPECT_EQ(error_position<ModelSyntaxError>("foo(1)"), 0u);
  EXPECT_EQ(error_position<ModelSyntaxError>("det(D,2y2)"), 7u);
  EXPECT_EQ(error_position<ModelSyntaxError>("sum(det(D,2x2), det(E,2x2))"), 16u);
  EXPECT_EQ(error_position<ModelSyntaxError>("gC(2,0)"), 5u);
  EXPECT_EQ(error_position<ModelSyntaxError>("gC(2,2,-1)"), 7u);
  EXPECT_EQ(error_position<ModelSyntaxError>("chain(det(D,2x2), gSA(2))"), 18u);
  EXPECT_EQ(error_position<ModelSyntaxError>("chain(det(D,2x2))"), 16u);
  EXPECT_EQ(error_position<ModelSyntaxError>("det(D,2x2) extra"), 11u);
  EXPECT_EQ(error_position<ModelSyntaxError>("det(1D,2x2)"), 4u);
  EXPECT_EQ(error_position<ModelSyntaxError>("gC(2,2,abc)"), 7u);
  EXPECT_EQ(error_position<ModelSyntaxError>("gC(2,2"), 6u);
}

TEST(Dsl, DimensionErrorsNameBothSides) {
  try {
    parse_model("sum(det(D,2x3), gC(2,4))");
    FAIL();
  } catch (const ModelError& e) {
    std::string what = e.what();
    EXPECT_NE(what.find("2x3"), std::string::npos);
    EXPECT_NE(what.find("2x4"), std::string::npos);
  }
  EXPECT_THROW(parse_model("wprod(det(R,3x3), det(I,4x4), 2, 4)"), ModelError);
  EXPECT_THROW(parse_model("wprod(det(R,2x2), det(I,3x3), 2, 4)"), ModelError);
  EXPECT_THROW(parse_model("chain(det(D,2x2), gC(3,4))"), ModelError);
  EXPECT_THROW(parse_model("saprod(det(R,2x2), 3)"), ModelError);
  EXPECT_THROW(parse_model("sum(wprod(det(R,2x2), det(I,2x2), 2, 2), gC(3,2))"), ModelError);
}

TEST(Compile, ChainOfIdentityIsWishart) {
  TransferMap a = compile(parse_model("chain(det(I,2x2), gC(2,4))"), 3);
  TransferMap b = compile(parse_model("gC(2,4)"), 3);
  EXPECT_EQ(a.evaluate(), b.evaluate());
}

TEST(Compile, ChainStagesInOrder) {
  CompiledModel c = compile_stages(parse_model("chain(det(D,2x2), gC(2,4), gC(2,3,0.5))"), 2);
  ASSERT_EQ(c.stages.size(), 2u);
  EXPECT_EQ(c.stages[0].dims(), (Dimensions{2, 4}));
  EXPECT_EQ(c.input.kind, ModelInput::Kind::kMatrix);
  // The second stage carries sigma^4 at weight 2.
  RationalMatrix second = c.stages[1].evaluate();
  RationalMatrix plain = wishart_product_transfer(2, 3, 2).evaluate();
  std::size_t i = c.output_basis.index_of(MomentKey({2}));
  EXPECT_EQ(second(i, i), plain(i, i) / 16);
}

TEST(Compile, SumLeafIsGram) {
  CompiledModel c = compile_stages(parse_model("sum(det(D,2x4), gC(2,4,0.5))"), 2);
  EXPECT_EQ(c.input.kind, ModelInput::Kind::kGram);
  ASSERT_EQ(c.stages.size(), 1u);
  EXPECT_EQ(c.stages[0].theorem(), TheoremId::kGaussSum);
  EXPECT_EQ(c.stages[0].sigma2(), Rational(1, 4));
}

TEST(Compile, ConstantModelsFoldToConstants) {
  CompiledModel c = compile_stages(parse_model("sasum(det(0,1x1), 1)"), 4);
  EXPECT_EQ(c.input.kind, ModelInput::Kind::kNone);
  ASSERT_EQ(c.stages.size(), 1u);
  EXPECT_EQ(c.stages[0].theorem(), TheoremId::kConstant);
  RationalMatrix m = c.stages[0].evaluate();
  EXPECT_EQ(m(c.output_basis.index_of(MomentKey({4})), 0), Rational(3));
  EXPECT_EQ(m(c.output_basis.index_of(MomentKey({2, 2})), 0), Rational(3));
}

TEST(Compile, IdentityLeafGramInSum) {
  // det(I, 2x4) in a sum is the amplitude I_{2x4}: (1/4) I I^H = I/4.
  TransferMap m = compile(parse_model("sum(det(I,2x4), gC(2,4,0))"), 2);
  std::size_t i = m.output_basis().index_of(MomentKey({1}));
  EXPECT_EQ(m.evaluate()(i, 0), Rational(1, 4));
}

TEST(Compile, TwoSidedInputForTwoLeaves) {
  CompiledModel c = compile_stages(parse_model("wprod(det(R,2x2), det(S,3x3), 2, 3)"), 2);
  EXPECT_EQ(c.input.kind, ModelInput::Kind::kPair);
  EXPECT_EQ(c.input.names, (std::vector<std::string>{"R", "S"}));
  EXPECT_TRUE(c.input_basis.two_sided_basis());
  EXPECT_FALSE(c.output_basis.two_sided_basis());
}

TEST(Compile, ConstantSideUsesOneSidedMap) {
  CompiledModel r = compile_stages(parse_model("wprod(det(R,2x2), det(I,3x3), 2, 3)"), 3);
  EXPECT_EQ(r.combined().evaluate(), wishart_product_transfer(2, 3, 3, WishartInput::kR).evaluate());
  CompiledModel s = compile_stages(parse_model("wprod(det(I,2x2), det(S,3x3), 2, 3)"), 3);
  EXPECT_EQ(s.combined().evaluate(), wishart_product_transfer(2, 3, 3, WishartInput::kS).evaluate());
}

TEST(Compile, PowerModelFirstMoment) {
  ModelExpr m = parse_model(
      "sum(scale(wprod(det(I,3x3), wprod(det(P,2x2), det(I,4x4), 2, 4), 3, 2), 2), gC(3,4,0.5))");
  CompiledModel c = compile_stages(m, 2);
  EXPECT_EQ(c.stages.size(), 4u);
  RationalMatrix t = c.combined().evaluate();
  std::size_t one = c.output_basis.index_of(MomentKey({1}));
  EXPECT_EQ(t(one, one), Rational(2));
  EXPECT_EQ(t(one, 0), Rational(1, 4));
}

TEST(Compile, RandomFactorsOnBothSidesUnsupported) {
  EXPECT_THROW(compile(parse_model("wprod(chain(det(R,2x2), gC(2,2)), det(S,3x3), 2, 3)"), 2), ModelError);
}

TEST(Compile, ObservationShape) {
  EXPECT_TRUE(observes_amplitude(parse_model("sum(det(D,2x4), gC(2,4))")));
  EXPECT_EQ(amplitude_columns(parse_model("sum(det(D,2x4), gC(2,4))")), 4);
  EXPECT_TRUE(observes_amplitude(parse_model("det(D,2x5)")));
  EXPECT_FALSE(observes_amplitude(parse_model("wprod(det(R,2x2), det(I,4x4), 2, 4)")));
  EXPECT_THROW(amplitude_columns(parse_model("saprod(det(D,2x2), 2)")), std::logic_error);
}

TEST(Compile, ConstantLeafMoments) {
  MomentVector ones = constant_leaf_moments(det("I", 3, 3), false, 2);
  for (const auto& v : ones.exact_values()) EXPECT_EQ(v, Rational(1));
  MomentVector gram = constant_leaf_moments(det("I", 2, 4), true, 2);
  EXPECT_EQ(gram.exact_value(MomentKey({2})), Rational(1, 16));
  MomentVector zero = constant_leaf_moments(det("0", 2, 2), false, 2);
  EXPECT_EQ(zero.exact_value(MomentKey({1})), Rational(0));
  EXPECT_EQ(zero.exact_value(MomentKey()), Rational(1));
}
