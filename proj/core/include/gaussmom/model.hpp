#pragma once

// Model expressions: trees of deterministic, complex Gaussian and selfadjoint
// Gaussian matrices, their text form, and compilation into transfer maps.
//
//   expr := "det(" name "," rows "x" cols ")"
//         | "gC(" n "," N ["," sigma] ")" | "gSA(" n ["," sigma] ")"
//         | "sum(" expr "," (gC | gSA) ")"
//         | "wprod(" expr "," expr "," n "," N ")"
//         | "chain(" expr { "," gC } ")"
//         | "saprod(" expr "," n ")" | "sasum(" expr "," n ["," sigma] ")"
//         | "scale(" expr "," factor ")"
//
// det(I, ...) and det(0, ...) are the identity and zero matrices.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gaussmom/moment_space.hpp"
#include "gaussmom/rational.hpp"
#include "gaussmom/transfer.hpp"

namespace gaussmom {

enum class NodeKind {
  kDet,               // deterministic leaf
  kGaussComplex,      // (sigma^2/N) X X^H on its own, X n x N
  kGaussSelfAdjoint,  // (sigma/sqrt n) X on its own
  kCorrProduct,       // (1/N) R X S X^H
  kGaussSum,          // (1/N)(R + sigma X)(R + sigma X)^H
  kSelfAdjProduct,    // E X / sqrt n
  kSelfAdjSum,        // E + (sigma/sqrt n) X
  kChain,             // E (s1^2/N1) X1 X1^H (s2^2/N2) X2 X2^H ...
  kScale,             // c E
};

struct ModelExpr {
  NodeKind kind = NodeKind::kDet;
  std::string name;  // det
  long rows = 0;     // det
  long cols = 0;     // det
  long n = 0;
  long N = 0;
  Rational sigma = 1;
  Rational factor = 1;  // scale
  // kCorrProduct: {R, S}; kGaussSum: {R, noise}; kChain: {E, gC...};
  // kSelfAdjProduct, kSelfAdjSum, kScale: {E}.
  std::vector<ModelExpr> children;
  std::size_t position = 0;  // offset in the source text

  bool is_identity_leaf() const { return kind == NodeKind::kDet && name == "I"; }
  bool is_zero_leaf() const { return kind == NodeKind::kDet && name == "0"; }
  bool is_constant_leaf() const { return is_identity_leaf() || is_zero_leaf(); }
  // Side of the square matrix whose moments this node denotes.
  long size() const;

  friend bool operator==(const ModelExpr& a, const ModelExpr& b);
};

ModelExpr det(std::string name, long rows, long cols);
ModelExpr gauss_complex(long n, long N, Rational sigma = 1);
ModelExpr gauss_selfadjoint(long n, Rational sigma = 1);
ModelExpr corr_product(ModelExpr r, ModelExpr s, long n, long N);
ModelExpr gauss_sum(ModelExpr r, ModelExpr noise);
ModelExpr selfadj_product(ModelExpr e, long n);
ModelExpr selfadj_sum(ModelExpr e, long n, Rational sigma = 1);
ModelExpr chain(ModelExpr e, std::vector<ModelExpr> factors);
ModelExpr scale(ModelExpr e, Rational factor);

class ModelSyntaxError : public std::runtime_error {
 public:
  ModelSyntaxError(std::size_t position, const std::string& message)
      : std::runtime_error("model syntax error at position " + std::to_string(position) + ": " + message),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// Dimension mismatches and model shapes the transfer maps cannot express.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses and dimension-checks. sum(E, gSA(...)) is normalized to sasum.
ModelExpr parse_model(std::string_view text);
std::string render_model(const ModelExpr& model);
// Throws ModelError naming both offending dimensions.
void check_dimensions(const ModelExpr& model);

// How the moments fed into a compiled model are obtained from its
// deterministic leaves.
struct ModelInput {
  enum class Kind { kNone, kMatrix, kGram, kPair };
  Kind kind = Kind::kNone;
  // kMatrix: moments of the leaf; kGram: of (1/cols) D D^H for the leaf;
  // kPair: joint moments of two independent leaves (R side first).
  std::vector<std::string> names;
  std::vector<std::pair<long, long>> shapes;
};

struct CompiledModel {
  // Applied in order; the last stage produces the observed moments.
  std::vector<TransferMap> stages;
  ModelInput input;
  Basis input_basis;
  Basis output_basis;

  TransferMap combined() const;
};

CompiledModel compile_stages(const ModelExpr& model, int max_weight);
TransferMap compile(const ModelExpr& model, int max_weight);

// Exact moments of the constant leaves I and 0 of the given shape, as seen
// by a node that reads a leaf directly (square) or through its Gram matrix.
MomentVector constant_leaf_moments(const ModelExpr& leaf, bool gram, int max_weight);

// Which matrix an observation of the model is: for a top-level Gaussian sum
// (or a bare complex Gaussian) an n x N amplitude Y with moments taken of
// (1/N) Y Y^H; otherwise the square matrix itself.
bool observes_amplitude(const ModelExpr& model);
long amplitude_columns(const ModelExpr& model);

}  // namespace gaussmom
