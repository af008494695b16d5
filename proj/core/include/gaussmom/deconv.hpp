#pragma once

// Inverse transfer maps: unbiased estimators of input moments from observed
// moments. All inverses are exact.

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "gaussmom/matrix.hpp"
#include "gaussmom/model.hpp"
#include "gaussmom/moment_space.hpp"
#include "gaussmom/transfer.hpp"

namespace gaussmom {

enum class DeconvStrategy {
  kAuto,              // back-substitution for triangular maps that mix weights
  kMatrixInverse,     // one exact inverse of the whole map
  kBackSubstitution,  // solve weight by weight, lowest first
};

struct BlockDiagnostic {
  int weight = 0;
  std::size_t size = 0;
  Rational determinant;
  bool unit_diagonal = false;  // the block is the identity
};

class SingularStageError : public std::runtime_error {
 public:
  SingularStageError(int weight, std::size_t stage, const std::string& message)
      : std::runtime_error(message), weight_(weight), stage_(stage) {}
  int weight() const { return weight_; }
  std::size_t stage() const { return stage_; }

 private:
  int weight_;
  std::size_t stage_;
};

class Deconvolver {
 public:
  const TransferMap& forward() const { return forward_; }
  DeconvStrategy strategy() const { return strategy_; }
  // One entry per weight block, empty when the map is not weight-triangular.
  const std::vector<BlockDiagnostic>& condition_report() const { return report_; }

  MomentVector apply(const MomentVector& observed) const;

 private:
  friend Deconvolver build_deconvolver(const TransferMap& map, DeconvStrategy strategy);

  TransferMap forward_;
  RationalMatrix matrix_;
  DeconvStrategy strategy_ = DeconvStrategy::kMatrixInverse;
  std::vector<BlockDiagnostic> report_;
  std::vector<std::vector<std::size_t>> blocks_;   // basis indices per weight
  std::vector<RationalMatrix> block_inverses_;     // back-substitution
  RationalMatrix inverse_;                         // matrix inverse
  std::vector<double> inverse_double_;
  std::vector<std::vector<double>> block_inverses_double_;
};

// Throws SingularStageError naming the first singular weight block, and
// std::invalid_argument for maps that are not square on their basis or when
// back-substitution is requested for a map that is not weight-triangular.
Deconvolver build_deconvolver(const TransferMap& map, DeconvStrategy strategy = DeconvStrategy::kAuto);

MomentVector deconvolve(const Deconvolver& d, const MomentVector& observed);
// Many observations at once, spread over the worker threads.
std::vector<MomentVector> deconvolve_all(const Deconvolver& d, const std::vector<MomentVector>& observed);

// The stages of a compiled model inverted in reverse order.
class MultistageDeconvolver {
 public:
  explicit MultistageDeconvolver(const CompiledModel& model, DeconvStrategy strategy = DeconvStrategy::kAuto);
  const std::vector<Deconvolver>& stages() const { return stages_; }
  MomentVector apply(const MomentVector& observed) const;

 private:
  std::vector<Deconvolver> stages_;
};

// Mixed moments of one observation: of (1/N) Y Y^H when the model is observed
// through an n x N amplitude Y, otherwise of the square matrix itself.
MomentVector observation_moments(const ModelExpr& model, const Matrix& observation, int max_weight);

// Averages the observations' moments and deconvolves them through every
// stage of the model.
MomentVector unbiased_estimate(const ModelExpr& model, const std::vector<Matrix>& observations, int max_weight,
                               DeconvStrategy strategy = DeconvStrategy::kAuto);
MomentVector unbiased_estimate(const ModelExpr& model, const Matrix& observation, int max_weight,
                               DeconvStrategy strategy = DeconvStrategy::kAuto);

}  // namespace gaussmom
