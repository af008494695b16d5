#pragma once

// Mixed-moment bookkeeping: keys (integer partitions), canonical bases,
// moment vectors and their text/JSON forms, and direct evaluation of mixed
// moments for deterministic matrices.

#include <compare>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gaussmom/combinat.hpp"
#include "gaussmom/matrix.hpp"
#include "gaussmom/rational.hpp"

namespace gaussmom {

// The index (p_1, ..., p_k) of E[tr(A^p_1) ... tr(A^p_k)], kept weakly
// decreasing. The empty key stands for the constant 1.
class MomentKey {
 public:
  MomentKey() = default;
  explicit MomentKey(std::vector<int> parts);
  MomentKey(std::initializer_list<int> parts) : MomentKey(std::vector<int>(parts)) {}

  const std::vector<int>& parts() const { return parts_; }
  int weight() const { return weight_; }
  int length() const { return static_cast<int>(parts_.size()); }
  bool empty() const { return parts_.empty(); }

  MomentKey with_part(int part) const;

  // "2,1,1" or "-" for the empty key.
  std::string to_string() const;
  static MomentKey parse(std::string_view text);

  friend bool operator==(const MomentKey&, const MomentKey&) = default;
  // Canonical order: weight ascending, then reverse-lexicographic, so
  // (3) < (2,1) < (1,1,1).
  friend std::strong_ordering operator<=>(const MomentKey& a, const MomentKey& b);

 private:
  std::vector<int> parts_;
  int weight_ = 0;
};

// R-side and S-side indices of a two-sided mixed moment. One-sided bases
// use keys whose S side is empty.
struct PairMomentKey {
  MomentKey r_parts;
  MomentKey s_parts;

  std::string to_string(bool two_sided) const;
  friend bool operator==(const PairMomentKey&, const PairMomentKey&) = default;
  friend std::strong_ordering operator<=>(const PairMomentKey& a, const PairMomentKey& b);
};

enum class Sidedness { kOne, kTwo };

// All partitions of w in reverse-lexicographic order.
std::vector<MomentKey> partitions_of(int w);
// Number of integer partitions of w.
long partition_count(int w);

class Basis {
 public:
  Basis() = default;
  // Empty key followed by every partition of weight 1..max_weight.
  static Basis one_sided(int max_weight);
  // Cartesian product of two one-sided bases; the S key varies slowest.
  static Basis two_sided(int max_weight);
  static Basis from_keys(Sidedness sided, int max_weight, std::vector<PairMomentKey> keys);

  Sidedness sidedness() const { return sided_; }
  bool two_sided_basis() const { return sided_ == Sidedness::kTwo; }
  int max_weight() const { return max_weight_; }
  std::size_t size() const { return keys_.size(); }
  const std::vector<PairMomentKey>& keys() const { return keys_; }
  const PairMomentKey& operator[](std::size_t i) const { return keys_[i]; }
  const MomentKey& key(std::size_t i) const { return keys_[i].r_parts; }

  std::optional<std::size_t> find(const PairMomentKey& key) const;
  std::optional<std::size_t> find(const MomentKey& key) const { return find(PairMomentKey{key, {}}); }
  // Throws std::out_of_range for keys outside the basis.
  std::size_t index_of(const PairMomentKey& key) const;
  std::size_t index_of(const MomentKey& key) const { return index_of(PairMomentKey{key, {}}); }

  // Indices whose key has the given (R-side) weight.
  std::vector<std::size_t> weight_block(int weight) const;

  friend bool operator==(const Basis& a, const Basis& b) {
    return a.sided_ == b.sided_ && a.max_weight_ == b.max_weight_ && a.keys_ == b.keys_;
  }

 private:
  Sidedness sided_ = Sidedness::kOne;
  int max_weight_ = 0;
  std::vector<PairMomentKey> keys_;
  std::map<PairMomentKey, std::size_t> index_;
};

// Values on a basis, either all exact rationals or all doubles.
class MomentVector {
 public:
  MomentVector() = default;
  static MomentVector exact(Basis basis, std::vector<Rational> values);
  static MomentVector approximate(Basis basis, std::vector<double> values);

  const Basis& basis() const { return basis_; }
  bool is_exact() const { return exact_; }
  std::size_t size() const { return basis_.size(); }

  double value(std::size_t i) const;
  double value(const MomentKey& key) const { return value(basis_.index_of(key)); }
  double value(const PairMomentKey& key) const { return value(basis_.index_of(key)); }
  // Throws std::logic_error on approximate vectors.
  const Rational& exact_value(std::size_t i) const;
  const Rational& exact_value(const MomentKey& key) const { return exact_value(basis_.index_of(key)); }

  std::vector<double> values() const;
  const std::vector<Rational>& exact_values() const;
  MomentVector to_approximate() const;

  // Restriction / extension to another basis of the same sidedness; missing
  // keys are an error.
  MomentVector restricted_to(const Basis& target) const;

 private:
  Basis basis_;
  bool exact_ = false;
  std::vector<Rational> exact_values_;
  std::vector<double> values_;
};

// Text form: "<key> <value>" per line in canonical basis order, "-" for the
// empty key, "r|s" for two-sided keys, exact values as "num/den".
void write_moment_vector(std::ostream& out, const MomentVector& v);
MomentVector read_moment_vector(std::istream& in, std::string_view source_name = "<stream>");
void write_moment_vector_file(const std::string& path, const MomentVector& v);
MomentVector read_moment_vector_file(const std::string& path);

std::string moment_vector_to_json(const MomentVector& v);
MomentVector moment_vector_from_json(std::string_view json);

// Products of normalized traces of powers of A, Re tr(A^p_1)...tr(A^p_k).
MomentVector eval_mixed_moments(const Matrix& a, int max_weight);
MomentVector eval_mixed_moments(std::span<const double> eigenvalues, int max_weight);
MomentVector eval_mixed_moments(std::span<const Rational> eigenvalues, int max_weight);
// Two-sided vector of independent R and S: value at (r, s) = R_r * S_s.
MomentVector eval_mixed_moments(const Matrix& r, const Matrix& s, int max_weight);
MomentVector combine_two_sided(const MomentVector& r_side, const MomentVector& s_side);

// Named deterministic matrices used as trace words.
class DetMatrixSet {
 public:
  void add(std::string label, Matrix m);
  bool contains(const std::string& label) const { return matrices_.count(label) != 0; }
  const Matrix& at(const std::string& label) const;
  const std::map<std::string, Matrix>& matrices() const { return matrices_; }

 private:
  std::map<std::string, Matrix> matrices_;
};

// D_rho: the product over blocks of rho of the normalized trace of the
// matrices labelled by word[j-1], multiplied in increasing j within a block.
// Positions outside the support of rho may have an empty label. Throws
// std::invalid_argument on a dimension mismatch or a missing label.
Complex d_rho(const DetMatrixSet& matrices, const SetPartition& rho, std::span<const std::string> word);

}  // namespace gaussmom
