#include "gaussmom/combinat.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace gaussmom {

namespace {

class UnionFind {
 public:
  explicit UnionFind(int size) : parent_(static_cast<std::size_t>(size) + 1) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  int find(int x) {
    while (parent_[static_cast<std::size_t>(x)] != x) {
      auto& p = parent_[static_cast<std::size_t>(x)];
      p = parent_[static_cast<std::size_t>(p)];
      x = p;
    }
    return x;
  }

  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent_[static_cast<std::size_t>(a)] = b;
  }

  // Blocks over the listed elements only.
  SetPartition partition(int ground_size, std::span<const int> elements) {
    std::vector<std::vector<int>> by_root(static_cast<std::size_t>(ground_size) + 1);
    for (int e : elements) by_root[static_cast<std::size_t>(find(e))].push_back(e);
    std::vector<std::vector<int>> blocks;
    for (auto& b : by_root) {
      if (!b.empty()) blocks.push_back(std::move(b));
    }
    return SetPartition(ground_size, std::move(blocks));
  }

 private:
  std::vector<int> parent_;
};

std::vector<int> iota_vector(int first, int last) {
  std::vector<int> v;
  for (int i = first; i <= last; ++i) v.push_back(i);
  return v;
}

// Visits every size-k subset of {1..p} in lexicographic order.
void for_each_subset(int p, int k, const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> subset(static_cast<std::size_t>(k));
  std::iota(subset.begin(), subset.end(), 1);
  if (k == 0) {
    visit(subset);
    return;
  }
  for (;;) {
    visit(subset);
    int i = k - 1;
    while (i >= 0 && subset[static_cast<std::size_t>(i)] == p - k + i + 1) --i;
    if (i < 0) return;
    ++subset[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) subset[static_cast<std::size_t>(j)] = subset[static_cast<std::size_t>(j - 1)] + 1;
  }
}

}  // namespace

// ---------------------------------------------------------------------------

CircleLayout::CircleLayout(std::vector<int> circle_lengths) : lengths_(std::move(circle_lengths)) {
  for (int len : lengths_) {
    if (len < 1) throw std::invalid_argument("circle lengths must be positive");
    total_ += len;
  }
  owner_.assign(static_cast<std::size_t>(total_) + 1, -1);
  next_.assign(static_cast<std::size_t>(total_) + 1, 0);
  prev_.assign(static_cast<std::size_t>(total_) + 1, 0);
  int start = 1;
  for (int c = 0; c < circle_count(); ++c) {
    int len = lengths_[static_cast<std::size_t>(c)];
    int last = start + len - 1;
    for (int j = start; j <= last; ++j) {
      owner_[static_cast<std::size_t>(j)] = c;
      next_[static_cast<std::size_t>(j)] = j == last ? start : j + 1;
      prev_[static_cast<std::size_t>(j)] = j == start ? last : j - 1;
    }
    start = last + 1;
  }
}

CircleLayout CircleLayout::doubled(std::span<const int> trace_powers) {
  std::vector<int> lengths;
  for (int p : trace_powers) lengths.push_back(2 * p);
  return CircleLayout(std::move(lengths));
}

CircleLayout CircleLayout::plain(std::span<const int> trace_powers) {
  return CircleLayout(std::vector<int>(trace_powers.begin(), trace_powers.end()));
}

// ---------------------------------------------------------------------------

Permutation::Permutation(std::vector<int> images) : images_(std::move(images)) {
  std::vector<bool> seen(images_.size() + 1, false);
  for (int v : images_) {
    if (v < 1 || v > size() || seen[static_cast<std::size_t>(v)]) {
      throw std::invalid_argument("not a permutation of {1..p}");
    }
    seen[static_cast<std::size_t>(v)] = true;
  }
}

Permutation Permutation::identity(int p) { return Permutation(iota_vector(1, p)); }

int Permutation::cycle_count() const {
  std::vector<bool> seen(images_.size() + 1, false);
  int cycles = 0;
  for (int j = 1; j <= size(); ++j) {
    if (seen[static_cast<std::size_t>(j)]) continue;
    ++cycles;
    for (int x = j; !seen[static_cast<std::size_t>(x)]; x = (*this)(x)) seen[static_cast<std::size_t>(x)] = true;
  }
  return cycles;
}

// ---------------------------------------------------------------------------

PartialPermutation::PartialPermutation(int p, std::vector<int> rho1, std::vector<int> pairing,
                                       bool disjointness_required)
    : p_(p),
      rho1_(std::move(rho1)),
      image_(static_cast<std::size_t>(p) + 2, 0),
      preimage_(static_cast<std::size_t>(p) + 2, 0),
      disjoint_(disjointness_required) {
  if (p < 1) throw std::invalid_argument("partial permutation needs p >= 1");
  if (rho1_.size() != pairing.size()) throw std::invalid_argument("rho1 and its pairing differ in size");
  for (std::size_t i = 0; i < rho1_.size(); ++i) {
    int from = rho1_[i];
    int to = pairing[i];
    if (from < 1 || from > p || to < 1 || to > p) throw std::invalid_argument("partial permutation index out of range");
    if (i > 0 && rho1_[i - 1] >= from) throw std::invalid_argument("rho1 must be strictly increasing");
    if (preimage_[static_cast<std::size_t>(to)] != 0) throw std::invalid_argument("pairing is not one-to-one");
    image_[static_cast<std::size_t>(from)] = to;
    preimage_[static_cast<std::size_t>(to)] = from;
  }
  rho2_ = pairing;
  std::sort(rho2_.begin(), rho2_.end());
  if (disjoint_ && !is_disjoint()) throw std::invalid_argument("rho1 and rho2 must be disjoint");
}

PartialPermutation PartialPermutation::from_permutation(const Permutation& pi) {
  return PartialPermutation(pi.size(), iota_vector(1, pi.size()), pi.images());
}

PartialPermutation PartialPermutation::empty(int p, bool disjointness_required) {
  return PartialPermutation(p, {}, {}, disjointness_required);
}

bool PartialPermutation::is_disjoint() const {
  for (int j : rho1_) {
    if (in_rho2(j)) return false;
  }
  return true;
}

std::string PartialPermutation::to_string() const {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < rho1_.size(); ++i) {
    if (i) os << ", ";
    os << rho1_[i] << "->" << image(rho1_[i]);
  }
  os << "}";
  return os.str();
}

// ---------------------------------------------------------------------------

SetPartition::SetPartition(int ground_size, std::vector<std::vector<int>> blocks)
    : ground_size_(ground_size), blocks_(std::move(blocks)), owner_(static_cast<std::size_t>(ground_size) + 1, -1) {
  for (auto& b : blocks_) {
    if (b.empty()) throw std::invalid_argument("empty block in set partition");
    std::sort(b.begin(), b.end());
  }
  std::sort(blocks_.begin(), blocks_.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    for (int e : blocks_[i]) {
      if (e < 1 || e > ground_size_) throw std::invalid_argument("block element outside the ground set");
      if (owner_[static_cast<std::size_t>(e)] != -1) throw std::invalid_argument("blocks are not disjoint");
      owner_[static_cast<std::size_t>(e)] = static_cast<int>(i);
    }
  }
}

std::vector<int> SetPartition::support() const {
  std::vector<int> out;
  for (int e = 1; e <= ground_size_; ++e) {
    if (owner_[static_cast<std::size_t>(e)] != -1) out.push_back(e);
  }
  return out;
}

std::vector<int> SetPartition::block_sizes() const {
  std::vector<int> sizes;
  for (const auto& b : blocks_) sizes.push_back(static_cast<int>(b.size()));
  return sizes;
}

int SetPartition::block_of(int element) const {
  if (element < 1 || element > ground_size_) return -1;
  return owner_[static_cast<std::size_t>(element)];
}

bool SetPartition::same_block(int a, int b) const {
  int ba = block_of(a);
  return ba != -1 && ba == block_of(b);
}

std::string SetPartition::to_string() const {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (i) os << ",";
    os << "{";
    for (std::size_t j = 0; j < blocks_[i].size(); ++j) {
      if (j) os << ",";
      os << blocks_[i][j];
    }
    os << "}";
  }
  os << "}";
  return os.str();
}

// ---------------------------------------------------------------------------

void for_each_permutation(int p, const std::function<void(const Permutation&)>& visit) {
  if (p < 1) throw std::invalid_argument("permutation size must be positive");
  std::vector<int> images = iota_vector(1, p);
  do {
    visit(Permutation(images));
  } while (std::next_permutation(images.begin(), images.end()));
}

std::vector<Permutation> enumerate_permutations(int p) {
  std::vector<Permutation> out;
  for_each_permutation(p, [&](const Permutation& pi) { out.push_back(pi); });
  return out;
}

void for_each_partial_permutation(int p, bool disjoint, const std::function<void(const PartialPermutation&)>& visit,
                                  std::optional<int> size) {
  if (p < 1) throw std::invalid_argument("partial permutation size must be positive");
  int k_min = size.value_or(0);
  int k_max = size.value_or(disjoint ? p / 2 : p);
  for (int k = k_min; k <= k_max; ++k) {
    for_each_subset(p, k, [&](const std::vector<int>& rho1) {
      for_each_subset(p, k, [&](const std::vector<int>& rho2) {
        if (disjoint) {
          for (int j : rho1) {
            if (std::binary_search(rho2.begin(), rho2.end(), j)) return;
          }
        }
        std::vector<int> pairing = rho2;
        do {
          visit(PartialPermutation(p, rho1, pairing, disjoint));
        } while (std::next_permutation(pairing.begin(), pairing.end()));
      });
    });
  }
}

std::vector<PartialPermutation> enumerate_partial_permutations(int p, bool disjoint) {
  std::vector<PartialPermutation> out;
  for_each_partial_permutation(p, disjoint, [&](const PartialPermutation& pi) { out.push_back(pi); });
  return out;
}

// ---------------------------------------------------------------------------

std::vector<int> hat_pi(const PartialPermutation& pi, const CircleLayout& layout) {
  if (layout.total_edges() != 2 * pi.p()) throw std::invalid_argument("hat_pi needs a layout with 2p edges");
  std::vector<int> hat(static_cast<std::size_t>(2 * pi.p()) + 1, 0);
  for (int j : pi.rho2()) hat[static_cast<std::size_t>(2 * j - 1)] = 2 * pi.preimage(j);
  for (int j : pi.rho1()) hat[static_cast<std::size_t>(2 * j)] = 2 * pi.image(j) - 1;
  return hat;
}

namespace {

UnionFind rho_union_find(const PartialPermutation& pi, const CircleLayout& layout) {
  auto hat = hat_pi(pi, layout);
  int edges = layout.total_edges();
  UnionFind uf(edges);
  for (int j = 1; j <= edges; ++j) {
    int partner = hat[static_cast<std::size_t>(j)];
    if (partner == 0) continue;
    uf.unite(j, layout.successor(partner));
    uf.unite(layout.successor(j), partner);
  }
  return uf;
}

UnionFind rho_sa_union_find(const PartialPermutation& pi, const CircleLayout& layout) {
  if (layout.total_edges() != pi.p()) throw std::invalid_argument("selfadjoint layout must have p edges");
  if (!pi.is_disjoint()) throw std::invalid_argument("selfadjoint pairings need disjoint rho1 and rho2");
  UnionFind uf(pi.p());
  for (int i : pi.rho1()) uf.unite(i, layout.successor(pi.image(i)));
  for (int i : pi.rho2()) uf.unite(layout.successor(pi.preimage(i)), i);
  return uf;
}

}  // namespace

SetPartition rho_of(const PartialPermutation& pi, const CircleLayout& layout) {
  auto uf = rho_union_find(pi, layout);
  auto all = iota_vector(1, layout.total_edges());
  return uf.partition(layout.total_edges(), all);
}

std::vector<int> deterministic_edges(const PartialPermutation& pi) {
  std::vector<int> det;
  for (int j = 1; j <= pi.p(); ++j) {
    if (!pi.in_rho2(j)) det.push_back(2 * j - 1);
    if (!pi.in_rho1(j)) det.push_back(2 * j);
  }
  return det;
}

SetPartition sigma_of(const PartialPermutation& pi, const CircleLayout& layout, std::span<const int> det_edges) {
  int edges = layout.total_edges();
  if (det_edges.empty()) return SetPartition(edges, {});
  auto rho = rho_union_find(pi, layout);
  std::vector<bool> is_det(static_cast<std::size_t>(edges) + 1, false);
  for (int d : det_edges) is_det[static_cast<std::size_t>(d)] = true;
  UnionFind uf(edges);
  for (int k : det_edges) {
    int next = layout.successor(k);
    if (is_det[static_cast<std::size_t>(next)]) uf.unite(k, next);
    for (int l : det_edges) {
      if (rho.find(next) == rho.find(l)) uf.unite(k, l);
    }
  }
  return uf.partition(edges, det_edges);
}

std::vector<int> unpaired_slots(const PartialPermutation& pi) {
  std::vector<int> out;
  for (int j = 1; j <= pi.p(); ++j) {
    if (!pi.in_rho1(j) && !pi.in_rho2(j)) out.push_back(j);
  }
  return out;
}

SetPartition rho_sa_of(const PartialPermutation& pi, const CircleLayout& layout) {
  auto uf = rho_sa_union_find(pi, layout);
  auto all = iota_vector(1, pi.p());
  return uf.partition(pi.p(), all);
}

SetPartition sigma_sa_of(const PartialPermutation& pi, const CircleLayout& layout) {
  auto rho = rho_sa_union_find(pi, layout);
  auto det = unpaired_slots(pi);
  int p = pi.p();
  if (det.empty()) return SetPartition(p, {});
  std::vector<bool> is_det(static_cast<std::size_t>(p) + 1, false);
  for (int d : det) is_det[static_cast<std::size_t>(d)] = true;
  UnionFind uf(p);
  for (int k : det) {
    int next = layout.successor(k);
    if (is_det[static_cast<std::size_t>(next)]) uf.unite(k, next);
    for (int l : det) {
      if (rho.find(next) == rho.find(l) || rho.find(k) == rho.find(layout.successor(l))) uf.unite(k, l);
    }
  }
  return uf.partition(p, det);
}

namespace {

std::vector<bool> touched_vertices(std::span<const int> det_edges, const CircleLayout& layout) {
  std::vector<bool> touched(static_cast<std::size_t>(layout.total_edges()) + 1, false);
  for (int d : det_edges) {
    touched[static_cast<std::size_t>(d)] = true;
    touched[static_cast<std::size_t>(layout.successor(d))] = true;
  }
  return touched;
}

}  // namespace

BlockStats block_stats(const SetPartition& rho, std::span<const int> det_edges, const CircleLayout& layout) {
  BlockStats stats;
  auto touched = touched_vertices(det_edges, layout);
  for (const auto& block : rho.blocks()) {
    bool even = block.front() % 2 == 0;
    bool meets = false;
    for (int v : block) {
      if ((v % 2 == 0) != even) throw std::logic_error("block of mixed parity: " + rho.to_string());
      if (static_cast<std::size_t>(v) < touched.size() && touched[static_cast<std::size_t>(v)]) meets = true;
    }
    if (even) {
      ++stats.k;
      stats.kd += meets ? 1 : 0;
      stats.even_block_sizes.push_back(static_cast<int>(block.size()));
    } else {
      ++stats.l;
      stats.ld += meets ? 1 : 0;
      stats.odd_block_sizes.push_back(static_cast<int>(block.size()));
    }
  }
  return stats;
}

int blocks_touching(const SetPartition& rho, std::span<const int> det_edges, const CircleLayout& layout) {
  auto touched = touched_vertices(det_edges, layout);
  int count = 0;
  for (const auto& block : rho.blocks()) {
    for (int v : block) {
      if (static_cast<std::size_t>(v) < touched.size() && touched[static_cast<std::size_t>(v)]) {
        ++count;
        break;
      }
    }
  }
  return count;
}

SetPartition restrict_parity(const SetPartition& rho, Parity parity) {
  std::vector<std::vector<int>> blocks;
  bool want_even = parity == Parity::kEven;
  for (const auto& block : rho.blocks()) {
    bool even = block.front() % 2 == 0;
    if (even != want_even) continue;
    std::vector<int> mapped;
    for (int v : block) {
      if ((v % 2 == 0) != even) throw std::logic_error("block of mixed parity: " + rho.to_string());
      mapped.push_back(even ? v / 2 : (v + 1) / 2);
    }
    blocks.push_back(std::move(mapped));
  }
  return SetPartition(rho.ground_size() / 2, std::move(blocks));
}

}  // namespace gaussmom
