#pragma once

// Transfer maps: the linear moment relations of the Gaussian matrix models,
// stored as matrices of CoeffPoly over mixed-moment bases. Constant terms
// live in the column of the empty key, so affine relations compose as
// ordinary matrix products.

#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "gaussmom/coeff_poly.hpp"
#include "gaussmom/matrix.hpp"
#include "gaussmom/moment_space.hpp"

namespace gaussmom {

// Largest weight built without a warning; the enumerations grow like p!.
inline constexpr int kDefaultWeightCap = 6;

enum class TheoremId {
  kIdentity,
  kWishartProduct,      // (1/N) R X S X^H
  kGaussSum,            // (1/N) (R + sX)(S + sX)^H
  kSelfAdjointProduct,  // R X / sqrt(n)
  kSelfAdjointSum,      // (R + sX) / sqrt(n)
  kScale,               // c A
  kConstant,            // a fixed moment vector
  kComposite,
};

std::string_view theorem_name(TheoremId id);
TheoremId theorem_from_name(std::string_view name);

// Which side of a Wishart product carries the unknown moments.
enum class WishartInput { kR, kS, kBoth };

// The dimensions a symbolic map is meant to be evaluated at; 0 = unbound.
struct Dimensions {
  long n = 0;
  long N = 0;
  friend bool operator==(const Dimensions&, const Dimensions&) = default;
};

struct RationalMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Rational> data;

  RationalMatrix() = default;
  RationalMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, Rational(0)) {}
  static RationalMatrix identity(std::size_t size);

  Rational& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  const Rational& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  friend RationalMatrix operator*(const RationalMatrix& a, const RationalMatrix& b);
  friend bool operator==(const RationalMatrix&, const RationalMatrix&) = default;
};

class TransferMap {
 public:
  TransferMap() = default;
  // entries is row-major, output_basis.size() x input_basis.size().
  TransferMap(TheoremId theorem, Basis input_basis, Basis output_basis, std::vector<CoeffPoly> entries,
              Dimensions dims = {}, Rational sigma2 = 1);

  TheoremId theorem() const { return theorem_; }
  const Basis& input_basis() const { return input_; }
  const Basis& output_basis() const { return output_; }
  std::size_t rows() const { return output_.size(); }
  std::size_t cols() const { return input_.size(); }
  const CoeffPoly& entry(std::size_t i, std::size_t j) const { return entries_[i * cols() + j]; }
  const CoeffPoly& entry(const MomentKey& out, const MomentKey& in) const;
  const std::vector<CoeffPoly>& entries() const { return entries_; }
  Dimensions dims() const { return dims_; }
  const Rational& sigma2() const { return sigma2_; }
  int max_weight() const { return output_.max_weight(); }

  bool is_square() const { return input_ == output_; }
  // True when every entry is a rational constant.
  bool is_numeric() const;
  // Nonzero entries only where input weight <= output weight.
  bool is_weight_triangular() const;
  // Nonzero entries only where input weight == output weight.
  bool preserves_weight() const;

  TransferMap with_dims(Dimensions dims) const;
  TransferMap with_theorem(TheoremId id) const;

  // Substitutes the bound dimensions. Throws std::logic_error when an entry
  // needs a dimension that is not bound.
  RationalMatrix evaluate() const;
  TransferMap evaluated() const;

  MomentVector apply(const MomentVector& input) const;

 private:
  TheoremId theorem_ = TheoremId::kIdentity;
  Basis input_;
  Basis output_;
  std::vector<CoeffPoly> entries_;
  Dimensions dims_;
  Rational sigma2_ = 1;
};

TransferMap identity_transfer(const Basis& basis);
// Moments of c A from those of A: weight w is multiplied by c^w.
TransferMap scale_transfer(int max_weight, const Rational& factor);
// Ignores its input apart from the empty key and produces `value`.
TransferMap constant_transfer(const MomentVector& value, const Basis& input_basis);

// E tr(((1/N) D X E X^H)^p) for deterministic D (n x n) and E (N x N),
// summed over S_p.
Complex corr_wishart_moment(const Matrix& d, const Matrix& e, int p);
// The same with D and E given by their normalized power traces
// d_traces[j] = tr(D^j), j = 0..p.
Rational corr_wishart_moment(std::span<const Rational> d_traces, std::span<const Rational> e_traces, long n, long N,
                             int p);

// Mixed moments of (1/N) R X S X^H. kR fixes S = I, kS fixes R = I, kBoth
// takes the two-sided basis of joint R/S moments.
TransferMap wishart_product_transfer(long n, long N, int max_weight, WishartInput input = WishartInput::kR);
TransferMap wishart_product_transfer(long n, long N, int max_weight, Sidedness sided);
// Mixed moments of (1/N)(R + sX)(S + sX)^H from those of (1/N) R S^H, with
// sigma2 = s^2.
TransferMap gauss_sum_transfer(long n, long N, int max_weight, const Rational& sigma2 = 1);
// Mixed moments of R X / sqrt(n) from those of R.
TransferMap selfadj_product_transfer(long n, int max_weight);
// Mixed moments of (R + sX)/sqrt(n) from those of R/sqrt(n).
TransferMap selfadj_sum_transfer(long n, int max_weight, const Rational& sigma2 = 1);

// outer after inner. Stays symbolic when both maps share their dimensions
// (or one of them is numeric), otherwise both are evaluated first.
TransferMap compose(const TransferMap& outer, const TransferMap& inner);

// Fixes one side of a two-sided map to a known moment vector.
TransferMap fold_side(const TransferMap& two_sided, WishartInput known_side, const MomentVector& known);

enum class FormulaLayout { kAuto, kMatrix, kExpanded };

struct FormulaOptions {
  RenderFormat format = RenderFormat::kPlain;
  RenderStyle style = RenderStyle::kCSubstituted;
  FormulaLayout layout = FormulaLayout::kAuto;
};

// Weight-preserving maps print one matrix per weight; the others print one
// expanded line per output key, e.g. "M_{2} = D_{2} + (2+2c)D_{1} + (1+c)".
std::string emit_formula(const TransferMap& map, const FormulaOptions& options = {});
// The right-hand side of one output row.
std::string emit_row(const TransferMap& map, std::size_t row, const FormulaOptions& options = {});

void write_transfer_map(std::ostream& out, const TransferMap& map);
TransferMap read_transfer_map(std::istream& in, std::string_view source_name = "<stream>");

// Threads used for map construction and Monte Carlo trials; 0 restores the
// default (all hardware threads).
void set_thread_count(unsigned threads);
unsigned thread_count();

// Runs body(i) for i in [0, count) on up to thread_count() threads.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

// Symbolic maps are cached in memory per (theorem, input side, max weight,
// sigma2), and on disk when GAUSSMOM_CACHE_DIR names a directory.
void clear_transfer_cache();
std::size_t transfer_cache_size();

}  // namespace gaussmom
