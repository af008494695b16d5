#pragma once

// Permutations, partial permutations and the equivalence relations they
// induce on the edges and vertices of one or more trace circles.
//
// All indices are 1-based. Edge j of a circle runs from vertex j to vertex
// j+1, where "+1" wraps around inside the circle that owns j.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gaussmom {

class CircleLayout {
 public:
  explicit CircleLayout(std::vector<int> circle_lengths);
  static CircleLayout single(int edges) { return CircleLayout({edges}); }
  // k circles of 2*p_i edges each: the layout of a mixed moment of a
  // product XY^H-type word with trace powers p_1..p_k.
  static CircleLayout doubled(std::span<const int> trace_powers);
  static CircleLayout plain(std::span<const int> trace_powers);

  int total_edges() const { return total_; }
  int circle_count() const { return static_cast<int>(lengths_.size()); }
  const std::vector<int>& circle_lengths() const { return lengths_; }
  int circle_of(int j) const { return owner_[static_cast<std::size_t>(j)]; }

  int successor(int j) const { return next_[static_cast<std::size_t>(j)]; }
  int predecessor(int j) const { return prev_[static_cast<std::size_t>(j)]; }

 private:
  std::vector<int> lengths_;
  int total_ = 0;
  std::vector<int> owner_;
  std::vector<int> next_;
  std::vector<int> prev_;
};

// A bijection of {1..p}.
class Permutation {
 public:
  explicit Permutation(std::vector<int> images);
  static Permutation identity(int p);

  int size() const { return static_cast<int>(images_.size()); }
  int operator()(int j) const { return images_[static_cast<std::size_t>(j - 1)]; }
  const std::vector<int>& images() const { return images_; }
  int cycle_count() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<int> images_;
};

// A one-to-one map between two equally sized subsets rho1, rho2 of {1..p}.
class PartialPermutation {
 public:
  // pairing[i] is the image of rho1[i]. rho1 must be strictly increasing.
  PartialPermutation(int p, std::vector<int> rho1, std::vector<int> pairing, bool disjointness_required = false);
  static PartialPermutation from_permutation(const Permutation& pi);
  static PartialPermutation empty(int p, bool disjointness_required = false);

  int p() const { return p_; }
  int size() const { return static_cast<int>(rho1_.size()); }
  const std::vector<int>& rho1() const { return rho1_; }
  // Sorted.
  const std::vector<int>& rho2() const { return rho2_; }
  bool disjointness_required() const { return disjoint_; }

  bool in_rho1(int j) const { return image_[static_cast<std::size_t>(j)] != 0; }
  bool in_rho2(int j) const { return preimage_[static_cast<std::size_t>(j)] != 0; }
  // Defined on rho1 only.
  int image(int j) const { return image_[static_cast<std::size_t>(j)]; }
  // Defined on rho2 only.
  int preimage(int j) const { return preimage_[static_cast<std::size_t>(j)]; }
  bool is_disjoint() const;

  std::string to_string() const;

 private:
  int p_;
  std::vector<int> rho1_;
  std::vector<int> rho2_;
  std::vector<int> image_;
  std::vector<int> preimage_;
  bool disjoint_;
};

class SetPartition {
 public:
  SetPartition() = default;
  // Blocks are normalized: each sorted, ordered by smallest element.
  SetPartition(int ground_size, std::vector<std::vector<int>> blocks);

  int ground_size() const { return ground_size_; }
  const std::vector<std::vector<int>>& blocks() const { return blocks_; }
  int block_count() const { return static_cast<int>(blocks_.size()); }
  bool empty() const { return blocks_.empty(); }
  // Elements covered by some block, ascending.
  std::vector<int> support() const;
  std::vector<int> block_sizes() const;
  // -1 when the element is outside the support.
  int block_of(int element) const;
  bool same_block(int a, int b) const;

  std::string to_string() const;
  friend bool operator==(const SetPartition&, const SetPartition&) = default;

 private:
  int ground_size_ = 0;
  std::vector<std::vector<int>> blocks_;
  std::vector<int> owner_;
};

struct BlockStats {
  int k = 0;   // blocks of even elements only
  int l = 0;   // blocks of odd elements only
  int kd = 0;  // even blocks meeting D ∪ (D+1)
  int ld = 0;  // odd blocks meeting D ∪ (D+1)
  std::vector<int> even_block_sizes;
  std::vector<int> odd_block_sizes;
};

enum class Parity { kOdd, kEven };

// Lexicographic order (std::next_permutation).
void for_each_permutation(int p, const std::function<void(const Permutation&)>& visit);
std::vector<Permutation> enumerate_permutations(int p);

// Ordered by |rho1| ascending, then lexicographic rho1, rho2 and pairing.
// When size is set only partial permutations with |rho1| == *size are
// produced.
void for_each_partial_permutation(int p, bool disjoint, const std::function<void(const PartialPermutation&)>& visit,
                                  std::optional<int> size = std::nullopt);
std::vector<PartialPermutation> enumerate_partial_permutations(int p, bool disjoint);

// The induced pairing on the 2p edges: odd edge 2j-1 is the X in slot j
// (j in rho2), even edge 2j is the X^H in slot j (j in rho1). Entry 0 marks
// an unpaired edge; index 0 is unused.
std::vector<int> hat_pi(const PartialPermutation& pi, const CircleLayout& layout);

// Vertex identifications of a complex Gaussian pairing on {1..2p}.
SetPartition rho_of(const PartialPermutation& pi, const CircleLayout& layout);

// The deterministic edges grouped into cyclic trace products.
SetPartition sigma_of(const PartialPermutation& pi, const CircleLayout& layout, std::span<const int> det_edges);
// Edges not used by the pairing (the complement of 2*rho1 ∪ 2*rho2-1).
std::vector<int> deterministic_edges(const PartialPermutation& pi);

// Selfadjoint analogues on the p vertices / edges of a word with p slots.
// Throw std::invalid_argument when rho1 and rho2 overlap.
SetPartition rho_sa_of(const PartialPermutation& pi, const CircleLayout& layout);
SetPartition sigma_sa_of(const PartialPermutation& pi, const CircleLayout& layout);
std::vector<int> unpaired_slots(const PartialPermutation& pi);

// Throws std::logic_error if a block mixes parities.
BlockStats block_stats(const SetPartition& rho, std::span<const int> det_edges, const CircleLayout& layout);

// Number of blocks of rho meeting D ∪ (D+1).
int blocks_touching(const SetPartition& rho, std::span<const int> det_edges, const CircleLayout& layout);

// Keeps the blocks of one parity and maps 2j-1 (odd) or 2j (even) to j.
SetPartition restrict_parity(const SetPartition& rho, Parity parity);

}  // namespace gaussmom
