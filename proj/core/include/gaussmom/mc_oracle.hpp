#pragma once

// Seeded Monte Carlo sampling of model expressions and empirical mixed
// moments with standard errors.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "gaussmom/matrix.hpp"
#include "gaussmom/model.hpp"
#include "gaussmom/moment_space.hpp"
#include "gaussmom/rng.hpp"
#include "gaussmom/transfer.hpp"

namespace gaussmom {

// i.i.d. standard complex Gaussian entries.
Matrix sample_complex_gaussian(long n, long N, RandomStream& rng);
// (Y + Y^H)/sqrt(2) for Y standard complex Gaussian n x n.
Matrix sample_selfadjoint_gaussian(long n, RandomStream& rng);

struct EnsembleSpec {
  ModelExpr model;
  DetMatrixSet bindings;
  std::uint64_t seed = 0;
  std::uint64_t trials = 1;
};

// One realization of the square matrix whose moments the model describes.
Matrix sample_model(const ModelExpr& model, const DetMatrixSet& bindings, RandomStream& rng);
// One realization of the n x N amplitude Y of a model observed through an
// amplitude (see observes_amplitude).
Matrix sample_amplitude(const ModelExpr& model, const DetMatrixSet& bindings, RandomStream& rng);

struct EmpiricalMoments {
  Basis basis;
  std::vector<double> mean;
  std::vector<double> std_error;
  std::uint64_t trials = 0;

  MomentVector as_vector() const { return MomentVector::approximate(basis, mean); }
};

// Mean and standard error of per-trial vectors on `basis`. Trial t draws
// from RandomStream(seed, t); trials are accumulated in fixed chunks merged
// in order, so results do not depend on the thread count.
EmpiricalMoments monte_carlo_mean(const Basis& basis, std::uint64_t trials, std::uint64_t seed,
                                  const std::function<std::vector<double>(RandomStream&)>& trial);

EmpiricalMoments empirical_mixed_moments(const EnsembleSpec& spec, int max_weight);

// The exact (when possible) input moments of a compiled model from the
// bindings of its deterministic leaves.
MomentVector input_moments(const CompiledModel& compiled, const DetMatrixSet& bindings);

struct ValidationRow {
  std::string key;
  double predicted = 0.0;
  double empirical = 0.0;
  double std_error = 0.0;
  double z = 0.0;
};

struct ValidationReport {
  std::vector<ValidationRow> rows;
  std::uint64_t trials = 0;
  double threshold = 4.0;

  bool passed() const;
  double max_abs_z() const;
};

// z = (empirical - predicted)/SE per key. With SE = 0 the row gets z = 0
// when the values agree to 1e-9 relative and infinity otherwise.
ValidationReport validate(const TransferMap& map, const EnsembleSpec& spec, int max_weight);
// Compiles spec.model itself.
ValidationReport validate(const EnsembleSpec& spec, int max_weight);

// Tab-separated "key predicted empirical se z" with a header line.
void write_report(std::ostream& out, const ValidationReport& report);

}  // namespace gaussmom
