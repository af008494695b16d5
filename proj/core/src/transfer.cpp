#include "gaussmom/transfer.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <shared_mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "gaussmom/combinat.hpp"

namespace gaussmom {

// ---------------------------------------------------------------------------
// Threads

namespace {

std::atomic<unsigned> g_threads{0};

}  // namespace

void set_thread_count(unsigned threads) { g_threads = threads; }

unsigned thread_count() {
  unsigned t = g_threads.load();
  if (t != 0) return t;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  std::size_t workers = std::min<std::size_t>(thread_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < count; i += workers) body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Names

namespace {

const std::vector<std::pair<TheoremId, std::string_view>>& theorem_names() {
  static const std::vector<std::pair<TheoremId, std::string_view>> names = {
      {TheoremId::kIdentity, "identity"},
      {TheoremId::kWishartProduct, "wishart_product"},
      {TheoremId::kGaussSum, "gauss_sum"},
      {TheoremId::kSelfAdjointProduct, "selfadjoint_product"},
      {TheoremId::kSelfAdjointSum, "selfadjoint_sum"},
      {TheoremId::kScale, "scale"},
      {TheoremId::kConstant, "constant"},
      {TheoremId::kComposite, "composite"},
  };
  return names;
}

}  // namespace

std::string_view theorem_name(TheoremId id) {
  for (const auto& [i, name] : theorem_names())
    if (i == id) return name;
  return "unknown";
}

TheoremId theorem_from_name(std::string_view name) {
  for (const auto& [i, n] : theorem_names())
    if (n == name) return i;
  throw std::invalid_argument("unknown transfer map kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// RationalMatrix

RationalMatrix RationalMatrix::identity(std::size_t size) {
  RationalMatrix m(size, size);
  for (std::size_t i = 0; i < size; ++i) m(i, i) = 1;
  return m;
}

RationalMatrix operator*(const RationalMatrix& a, const RationalMatrix& b) {
  if (a.cols != b.rows) throw std::invalid_argument("rational matrix product: inner dimensions differ");
  RationalMatrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t k = 0; k < a.cols; ++k) {
      const Rational& x = a(i, k);
      if (x == 0) continue;
      for (std::size_t j = 0; j < b.cols; ++j)
        if (b(k, j) != 0) c(i, j) += x * b(k, j);
    }
  return c;
}

// ---------------------------------------------------------------------------
// TransferMap

TransferMap::TransferMap(TheoremId theorem, Basis input_basis, Basis output_basis, std::vector<CoeffPoly> entries,
                         Dimensions dims, Rational sigma2)
    : theorem_(theorem),
      input_(std::move(input_basis)),
      output_(std::move(output_basis)),
      entries_(std::move(entries)),
      dims_(dims),
      sigma2_(std::move(sigma2)) {
  if (entries_.size() != input_.size() * output_.size())
    throw std::invalid_argument("transfer map entry count does not match its bases");
}

const CoeffPoly& TransferMap::entry(const MomentKey& out, const MomentKey& in) const {
  return entry(output_.index_of(out), input_.index_of(in));
}

bool TransferMap::is_numeric() const {
  return std::all_of(entries_.begin(), entries_.end(), [](const CoeffPoly& c) { return c.is_constant(); });
}

bool TransferMap::is_weight_triangular() const {
  for (std::size_t i = 0; i < rows(); ++i)
    for (std::size_t j = 0; j < cols(); ++j)
      if (!entry(i, j).is_zero() && input_[j].r_parts.weight() > output_[i].r_parts.weight()) return false;
  return true;
}

bool TransferMap::preserves_weight() const {
  for (std::size_t i = 0; i < rows(); ++i)
    for (std::size_t j = 0; j < cols(); ++j)
      if (!entry(i, j).is_zero() && input_[j].r_parts.weight() != output_[i].r_parts.weight()) return false;
  return true;
}

TransferMap TransferMap::with_dims(Dimensions dims) const {
  TransferMap copy = *this;
  copy.dims_ = dims;
  return copy;
}

TransferMap TransferMap::with_theorem(TheoremId id) const {
  TransferMap copy = *this;
  copy.theorem_ = id;
  return copy;
}

RationalMatrix TransferMap::evaluate() const {
  RationalMatrix m(rows(), cols());
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    const CoeffPoly& c = entries_[k];
    if (c.is_zero()) continue;
    if (c.depends_on_n() && dims_.n == 0) throw std::logic_error("transfer map entry needs n, which is unbound");
    if (c.depends_on_N() && dims_.N == 0) throw std::logic_error("transfer map entry needs N, which is unbound");
    m.data[k] = c.eval(Rational(dims_.n == 0 ? 1 : dims_.n), Rational(dims_.N == 0 ? 1 : dims_.N));
  }
  return m;
}

TransferMap TransferMap::evaluated() const {
  RationalMatrix m = evaluate();
  std::vector<CoeffPoly> entries;
  entries.reserve(m.data.size());
  for (const auto& q : m.data) entries.emplace_back(q);
  return TransferMap(theorem_, input_, output_, std::move(entries), {}, sigma2_);
}

MomentVector TransferMap::apply(const MomentVector& input) const {
  if (!(input.basis() == input_)) throw std::invalid_argument("moment vector basis does not match the map input");
  RationalMatrix m = evaluate();
  if (input.is_exact()) {
    std::vector<Rational> out(rows(), Rational(0));
    for (std::size_t i = 0; i < rows(); ++i)
      for (std::size_t j = 0; j < cols(); ++j)
        if (m(i, j) != 0) out[i] += m(i, j) * input.exact_value(j);
    return MomentVector::exact(output_, std::move(out));
  }
  std::vector<double> out(rows(), 0.0);
  for (std::size_t i = 0; i < rows(); ++i)
    for (std::size_t j = 0; j < cols(); ++j)
      if (m(i, j) != 0) out[i] += to_double(m(i, j)) * input.value(j);
  return MomentVector::approximate(output_, std::move(out));
}

TransferMap identity_transfer(const Basis& basis) {
  std::vector<CoeffPoly> entries(basis.size() * basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) entries[i * basis.size() + i] = CoeffPoly(1L);
  return TransferMap(TheoremId::kIdentity, basis, basis, std::move(entries));
}

TransferMap scale_transfer(int max_weight, const Rational& factor) {
  Basis basis = Basis::one_sided(max_weight);
  std::vector<CoeffPoly> entries(basis.size() * basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i)
    entries[i * basis.size() + i] = CoeffPoly(pow(factor, basis.key(i).weight()));
  return TransferMap(TheoremId::kScale, basis, basis, std::move(entries));
}

TransferMap constant_transfer(const MomentVector& value, const Basis& input_basis) {
  std::size_t empty = input_basis.index_of(PairMomentKey{});
  std::vector<CoeffPoly> entries(value.size() * input_basis.size());
  for (std::size_t i = 0; i < value.size(); ++i)
    entries[i * input_basis.size() + empty] = CoeffPoly(value.exact_value(i));
  return TransferMap(TheoremId::kConstant, input_basis, value.basis(), std::move(entries));
}

// ---------------------------------------------------------------------------
// Theorem sums

namespace {

MomentKey key_from_sizes(std::vector<int> sizes, int divisor = 1) {
  for (int& s : sizes) {
    if (s % divisor != 0) throw std::logic_error("block size not divisible as required");
    s /= divisor;
  }
  return MomentKey(std::move(sizes));
}

// Accumulates one output row of a map.
class RowBuilder {
 public:
  explicit RowBuilder(const Basis& input) : input_(input), row_(input.size()) {}
  void add(const PairMomentKey& column, const Rational& coefficient, int n_exp, int N_exp) {
    row_[input_.index_of(column)].add_term(coefficient, n_exp, N_exp);
  }
  std::vector<CoeffPoly> take() { return std::move(row_); }

 private:
  const Basis& input_;
  std::vector<CoeffPoly> row_;
};

template <typename RowFn>
TransferMap build_rows(TheoremId id, Basis input, Basis output, RowFn row_fn, const Rational& sigma2) {
  std::vector<std::vector<CoeffPoly>> rows(output.size());
  parallel_for(output.size(), [&](std::size_t i) {
    RowBuilder row(input);
    const MomentKey& key = output.key(i);
    if (key.empty()) {
      row.add(PairMomentKey{}, 1, 0, 0);
    } else {
      row_fn(key, row);
    }
    rows[i] = row.take();
  });
  std::vector<CoeffPoly> entries;
  entries.reserve(output.size() * input.size());
  for (auto& r : rows)
    for (auto& c : r) entries.push_back(std::move(c));
  return TransferMap(id, std::move(input), std::move(output), std::move(entries), {}, sigma2);
}

TransferMap build_wishart(int max_weight, WishartInput side) {
  Basis output = Basis::one_sided(max_weight);
  Basis input = side == WishartInput::kBoth ? Basis::two_sided(max_weight) : Basis::one_sided(max_weight);
  auto row_fn = [&](const MomentKey& key, RowBuilder& row) {
    const int p = key.weight();
    const int traces = key.length();
    CircleLayout layout = CircleLayout::doubled(key.parts());
    for_each_permutation(p, [&](const Permutation& perm) {
      auto pi = PartialPermutation::from_permutation(perm);
      BlockStats s = block_stats(rho_of(pi, layout), {}, layout);
      MomentKey r_key(s.odd_block_sizes);
      MomentKey s_key(s.even_block_sizes);
      PairMomentKey column;
      switch (side) {
        case WishartInput::kR: column = {r_key, {}}; break;
        case WishartInput::kS: column = {s_key, {}}; break;
        case WishartInput::kBoth: column = {r_key, s_key}; break;
      }
      row.add(column, 1, s.l - traces, s.k - p);
    });
  };
  return build_rows(TheoremId::kWishartProduct, std::move(input), std::move(output), row_fn, 1);
}

TransferMap build_gauss_sum(int max_weight, const Rational& sigma2) {
  Basis basis = Basis::one_sided(max_weight);
  auto row_fn = [&](const MomentKey& key, RowBuilder& row) {
    const int p = key.weight();
    const int traces = key.length();
    CircleLayout layout = CircleLayout::doubled(key.parts());
    for_each_partial_permutation(p, false, [&](const PartialPermutation& pi) {
      auto det = deterministic_edges(pi);
      SetPartition rho = rho_of(pi, layout);
      SetPartition sigma = sigma_of(pi, layout, det);
      BlockStats s = block_stats(rho, det, layout);
      const int pairs = pi.size();
      int n_exp = -traces + s.l - s.ld + sigma.block_count();
      int N_exp = -pairs + s.k - s.kd;
      row.add({key_from_sizes(sigma.block_sizes(), 2), {}}, pow(sigma2, pairs), n_exp, N_exp);
    });
  };
  return build_rows(TheoremId::kGaussSum, basis, basis, row_fn, sigma2);
}

TransferMap build_selfadj_product(int max_weight) {
  Basis basis = Basis::one_sided(max_weight);
  auto row_fn = [&](const MomentKey& key, RowBuilder& row) {
    const int p = key.weight();
    if (p % 2 != 0) return;
    const int traces = key.length();
    CircleLayout layout = CircleLayout::plain(key.parts());
    const Rational weight = pow(Rational(2), -p / 2);
    for_each_partial_permutation(
        p, true,
        [&](const PartialPermutation& pi) {
          SetPartition rho = rho_sa_of(pi, layout);
          row.add({key_from_sizes(rho.block_sizes()), {}}, weight, rho.block_count() - p / 2 - traces, 0);
        },
        p / 2);
  };
  return build_rows(TheoremId::kSelfAdjointProduct, basis, basis, row_fn, 1);
}

TransferMap build_selfadj_sum(int max_weight, const Rational& sigma2) {
  Basis basis = Basis::one_sided(max_weight);
  auto row_fn = [&](const MomentKey& key, RowBuilder& row) {
    const int p = key.weight();
    const int traces = key.length();
    CircleLayout layout = CircleLayout::plain(key.parts());
    for_each_partial_permutation(p, true, [&](const PartialPermutation& pi) {
      SetPartition rho = rho_sa_of(pi, layout);
      SetPartition sigma = sigma_sa_of(pi, layout);
      auto det = unpaired_slots(pi);
      const int pairs = pi.size();
      const int d = blocks_touching(rho, det, layout);
      int n_exp = -pairs + rho.block_count() - d - traces + sigma.block_count();
      row.add({key_from_sizes(sigma.block_sizes()), {}}, pow(sigma2, pairs) * pow(Rational(2), -pairs), n_exp, 0);
    });
  };
  return build_rows(TheoremId::kSelfAdjointSum, basis, basis, row_fn, sigma2);
}

// ---------------------------------------------------------------------------
// Cache

std::shared_mutex g_cache_mutex;
std::map<std::string, TransferMap> g_cache;

std::string cache_key(TheoremId id, int side, int max_weight, const Rational& sigma2) {
  std::string s2 = to_string(sigma2);
  std::replace(s2.begin(), s2.end(), '/', '_');
  std::replace(s2.begin(), s2.end(), '-', 'm');
  return std::string(theorem_name(id)) + "_" + std::to_string(side) + "_P" + std::to_string(max_weight) + "_s" + s2;
}

template <typename Build>
TransferMap cached(TheoremId id, int side, int max_weight, const Rational& sigma2, Build build) {
  const std::string key = cache_key(id, side, max_weight, sigma2);
  {
    std::shared_lock lock(g_cache_mutex);
    auto it = g_cache.find(key);
    if (it != g_cache.end()) return it->second;
  }
  std::optional<TransferMap> map;
  const char* dir = std::getenv("GAUSSMOM_CACHE_DIR");
  std::filesystem::path file;
  if (dir != nullptr && *dir != '\0') {
    file = std::filesystem::path(dir) / (key + ".txt");
    std::ifstream in(file);
    if (in) {
      try {
        map = read_transfer_map(in, file.string());
      } catch (const std::exception&) {
        map.reset();
      }
    }
  }
  if (!map) {
    map = build();
    if (!file.empty()) {
      std::error_code ec;
      std::filesystem::create_directories(file.parent_path(), ec);
      std::ofstream out(file);
      if (out) write_transfer_map(out, *map);
    }
  }
  std::unique_lock lock(g_cache_mutex);
  return g_cache.emplace(key, std::move(*map)).first->second;
}

void check_weight(int max_weight) {
  if (max_weight < 1) throw std::invalid_argument("maximum weight must be at least 1");
}

void check_dims(long n, long N) {
  if (n < 1 || N < 1) throw std::invalid_argument("matrix dimensions must be positive");
}

}  // namespace

void clear_transfer_cache() {
  std::unique_lock lock(g_cache_mutex);
  g_cache.clear();
}

std::size_t transfer_cache_size() {
  std::shared_lock lock(g_cache_mutex);
  return g_cache.size();
}

TransferMap wishart_product_transfer(long n, long N, int max_weight, WishartInput input) {
  check_weight(max_weight);
  check_dims(n, N);
  return cached(TheoremId::kWishartProduct, static_cast<int>(input), max_weight, 1,
                [&] { return build_wishart(max_weight, input); })
      .with_dims({n, N});
}

TransferMap wishart_product_transfer(long n, long N, int max_weight, Sidedness sided) {
  return wishart_product_transfer(n, N, max_weight, sided == Sidedness::kOne ? WishartInput::kR : WishartInput::kBoth);
}

TransferMap gauss_sum_transfer(long n, long N, int max_weight, const Rational& sigma2) {
  check_weight(max_weight);
  check_dims(n, N);
  if (sigma2 < 0) throw std::invalid_argument("noise variance must be nonnegative");
  return cached(TheoremId::kGaussSum, 0, max_weight, sigma2, [&] { return build_gauss_sum(max_weight, sigma2); })
      .with_dims({n, N});
}

TransferMap selfadj_product_transfer(long n, int max_weight) {
  check_weight(max_weight);
  check_dims(n, 1);
  return cached(TheoremId::kSelfAdjointProduct, 0, max_weight, 1, [&] { return build_selfadj_product(max_weight); })
      .with_dims({n, 0});
}

TransferMap selfadj_sum_transfer(long n, int max_weight, const Rational& sigma2) {
  check_weight(max_weight);
  check_dims(n, 1);
  if (sigma2 < 0) throw std::invalid_argument("noise variance must be nonnegative");
  return cached(TheoremId::kSelfAdjointSum, 0, max_weight, sigma2,
                [&] { return build_selfadj_sum(max_weight, sigma2); })
      .with_dims({n, 0});
}

// ---------------------------------------------------------------------------
// Direct Theorem-1 sums

Complex corr_wishart_moment(const Matrix& d, const Matrix& e, int p) {
  if (d.rows() != d.cols() || e.rows() != e.cols()) throw std::invalid_argument("D and E must be square");
  if (p < 1) throw std::invalid_argument("moment order must be positive");
  const double n = static_cast<double>(d.rows());
  const double N = static_cast<double>(e.rows());
  DetMatrixSet set;
  set.add("D", d);
  set.add("E", e);
  std::vector<std::string> d_word(static_cast<std::size_t>(p), "D");
  std::vector<std::string> e_word(static_cast<std::size_t>(p), "E");
  CircleLayout layout = CircleLayout::single(2 * p);
  Complex total = 0.0;
  for_each_permutation(p, [&](const Permutation& perm) {
    SetPartition rho = rho_of(PartialPermutation::from_permutation(perm), layout);
    BlockStats s = block_stats(rho, {}, layout);
    Complex term = d_rho(set, restrict_parity(rho, Parity::kOdd), d_word) *
                   d_rho(set, restrict_parity(rho, Parity::kEven), e_word);
    total += std::pow(N, s.k - p) * std::pow(n, s.l - 1) * term;
  });
  return total;
}

Rational corr_wishart_moment(std::span<const Rational> d_traces, std::span<const Rational> e_traces, long n, long N,
                             int p) {
  if (p < 1) throw std::invalid_argument("moment order must be positive");
  if (d_traces.size() <= static_cast<std::size_t>(p) || e_traces.size() <= static_cast<std::size_t>(p))
    throw std::invalid_argument("power traces up to p are required");
  CircleLayout layout = CircleLayout::single(2 * p);
  Rational total = 0;
  for_each_permutation(p, [&](const Permutation& perm) {
    BlockStats s = block_stats(rho_of(PartialPermutation::from_permutation(perm), layout), {}, layout);
    Rational term = pow(Rational(N), s.k - p) * pow(Rational(n), s.l - 1);
    for (int b : s.odd_block_sizes) term *= d_traces[static_cast<std::size_t>(b)];
    for (int b : s.even_block_sizes) term *= e_traces[static_cast<std::size_t>(b)];
    total += term;
  });
  return total;
}

// ---------------------------------------------------------------------------
// Composition

TransferMap compose(const TransferMap& outer, const TransferMap& inner) {
  if (!(outer.input_basis() == inner.output_basis()))
    throw std::invalid_argument("cannot compose transfer maps: bases differ");
  const bool symbolic = outer.dims() == inner.dims() || outer.is_numeric() || inner.is_numeric();
  TransferMap a = symbolic ? outer : outer.evaluated();
  TransferMap b = symbolic ? inner : inner.evaluated();
  Dimensions dims;
  if (symbolic) dims = outer.is_numeric() && !inner.is_numeric() ? inner.dims() : outer.dims();
  const std::size_t r = a.rows(), m = a.cols(), c = b.cols();
  std::vector<CoeffPoly> entries(r * c);
  parallel_for(r, [&](std::size_t i) {
    for (std::size_t k = 0; k < m; ++k) {
      const CoeffPoly& x = a.entry(i, k);
      if (x.is_zero()) continue;
      for (std::size_t j = 0; j < c; ++j) {
        const CoeffPoly& y = b.entry(k, j);
        if (!y.is_zero()) entries[i * c + j] += x * y;
      }
    }
  });
  TheoremId id = TheoremId::kComposite;
  if (outer.theorem() == TheoremId::kIdentity) id = inner.theorem();
  if (inner.theorem() == TheoremId::kIdentity) id = outer.theorem();
  return TransferMap(id, inner.input_basis(), outer.output_basis(), std::move(entries), dims,
                     outer.sigma2() * inner.sigma2());
}

TransferMap fold_side(const TransferMap& two_sided, WishartInput known_side, const MomentVector& known) {
  if (!two_sided.input_basis().two_sided_basis()) throw std::invalid_argument("fold_side needs a two-sided map");
  if (known_side == WishartInput::kBoth) throw std::invalid_argument("fold_side: pick one side");
  Basis free = Basis::one_sided(two_sided.input_basis().max_weight());
  std::vector<CoeffPoly> entries(two_sided.rows() * free.size());
  for (std::size_t i = 0; i < two_sided.rows(); ++i)
    for (std::size_t j = 0; j < two_sided.cols(); ++j) {
      const CoeffPoly& x = two_sided.entry(i, j);
      if (x.is_zero()) continue;
      const PairMomentKey& key = two_sided.input_basis()[j];
      const MomentKey& fixed = known_side == WishartInput::kS ? key.s_parts : key.r_parts;
      const MomentKey& open = known_side == WishartInput::kS ? key.r_parts : key.s_parts;
      const Rational& v = known.exact_value(fixed);
      if (v == 0) continue;
      entries[i * free.size() + free.index_of(open)] += x * v;
    }
  return TransferMap(two_sided.theorem(), free, two_sided.output_basis(), std::move(entries), two_sided.dims(),
                     two_sided.sigma2());
}

// ---------------------------------------------------------------------------
// Formula output

namespace {

char output_symbol() { return 'M'; }

char input_symbol(const TransferMap& map) {
  switch (map.theorem()) {
    case TheoremId::kGaussSum:
    case TheoremId::kSelfAdjointSum:
      return 'D';
    default:
      return 'R';
  }
}

std::string subscript(const MomentKey& key) { return "_{" + key.to_string() + "}"; }

// D_{2}D_{1}^{2} style product of single traces.
std::string moment_product(char symbol, const MomentKey& key) {
  std::string out;
  const auto& parts = key.parts();
  for (std::size_t i = 0; i < parts.size();) {
    std::size_t j = i;
    while (j < parts.size() && parts[j] == parts[i]) ++j;
    out += std::string(1, symbol) + "_{" + std::to_string(parts[i]) + "}";
    if (j - i > 1) out += "^{" + std::to_string(j - i) + "}";
    i = j;
  }
  return out;
}

std::string input_term(const TransferMap& map, const PairMomentKey& key) {
  if (map.input_basis().two_sided_basis()) {
    if (key.r_parts.empty() && key.s_parts.empty()) return "";
    return "R_{" + key.r_parts.to_string() + ";" + key.s_parts.to_string() + "}";
  }
  return moment_product(input_symbol(map), key.r_parts);
}

std::string open_paren(const FormulaOptions& o) { return o.format == RenderFormat::kLatex ? "\\left(" : "("; }
std::string close_paren(const FormulaOptions& o) { return o.format == RenderFormat::kLatex ? "\\right)" : ")"; }

bool single_term(const CoeffPoly& c) { return c.terms().size() == 1; }

}  // namespace

std::string emit_row(const TransferMap& map, std::size_t row, const FormulaOptions& options) {
  // Highest input weight first, canonical order within a weight, constant last.
  std::vector<std::size_t> order;
  for (std::size_t j = 0; j < map.cols(); ++j)
    if (!map.entry(row, j).is_zero()) order.push_back(j);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    int wa = map.input_basis()[a].r_parts.weight() + map.input_basis()[a].s_parts.weight();
    int wb = map.input_basis()[b].r_parts.weight() + map.input_basis()[b].s_parts.weight();
    return wa > wb;
  });
  if (order.empty()) return "0";
  std::string out;
  bool first = true;
  for (std::size_t j : order) {
    const CoeffPoly& c = map.entry(row, j);
    std::string term = input_term(map, map.input_basis()[j]);
    bool negative = false;
    std::string coefficient;
    if (single_term(c)) {
      const auto& [e, q] = *c.terms().begin();
      negative = q < 0;
      CoeffPoly magnitude = negative ? -c : c;
      if (!(magnitude == CoeffPoly(1L)) || term.empty()) coefficient = render(magnitude, options.style, options.format);
    } else {
      coefficient = open_paren(options) + render(c, options.style, options.format) + close_paren(options);
    }
    if (first) {
      out += negative ? "-" : "";
    } else {
      out += negative ? " - " : " + ";
    }
    out += coefficient + term;
    first = false;
  }
  return out;
}

std::string emit_formula(const TransferMap& map, const FormulaOptions& options) {
  const bool latex = options.format == RenderFormat::kLatex;
  FormulaLayout layout = options.layout;
  if (layout == FormulaLayout::kAuto)
    layout = map.preserves_weight() && map.is_square() ? FormulaLayout::kMatrix : FormulaLayout::kExpanded;
  std::ostringstream out;
  const std::string eq = latex ? " &=& " : " = ";
  const std::string eol = latex ? " \\\\\n" : "\n";

  if (layout == FormulaLayout::kExpanded) {
    for (std::size_t i = 0; i < map.rows(); ++i) {
      const MomentKey& key = map.output_basis().key(i);
      if (key.empty()) continue;
      out << output_symbol() << subscript(key) << eq << emit_row(map, i, options) << eol;
    }
    return out.str();
  }

  for (int w = 1; w <= map.max_weight(); ++w) {
    auto out_block = map.output_basis().weight_block(w);
    auto in_block = map.input_basis().weight_block(w);
    bool zero = true;
    for (std::size_t i : out_block)
      for (std::size_t j : in_block) zero = zero && map.entry(i, j).is_zero();
    if (zero || out_block.size() == 1) {
      for (std::size_t i : out_block)
        out << output_symbol() << subscript(map.output_basis().key(i)) << eq << emit_row(map, i, options) << eol;
      continue;
    }
    auto column = [&](char symbol, const Basis& basis, const std::vector<std::size_t>& block) {
      std::string s = latex ? "\\left(\\begin{array}{c} " : "[";
      for (std::size_t k = 0; k < block.size(); ++k) {
        if (k) s += latex ? " \\\\ " : "; ";
        s += std::string(1, symbol) + subscript(basis.key(block[k]));
      }
      return s + (latex ? " \\end{array}\\right)" : "]");
    };
    std::string matrix = latex ? "\\left(\\begin{array}{" + std::string(in_block.size(), 'c') + "} " : "[";
    for (std::size_t a = 0; a < out_block.size(); ++a) {
      if (a) matrix += latex ? " \\\\ " : "; ";
      for (std::size_t b = 0; b < in_block.size(); ++b) {
        if (b) matrix += latex ? " & " : ", ";
        matrix += render(map.entry(out_block[a], in_block[b]), options.style, options.format);
      }
    }
    matrix += latex ? " \\end{array}\\right)" : "]";
    out << column(output_symbol(), map.output_basis(), out_block) << eq << matrix << " "
        << column(input_symbol(map), map.input_basis(), in_block) << eol;
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Serialization

void write_transfer_map(std::ostream& out, const TransferMap& map) {
  auto sided = [](const Basis& b) { return b.two_sided_basis() ? "two" : "one"; };
  out << "# gaussmom transfer map v1\n";
  out << "theorem " << theorem_name(map.theorem()) << "\n";
  out << "n " << map.dims().n << "\n";
  out << "N " << map.dims().N << "\n";
  out << "sigma2 " << to_string(map.sigma2()) << "\n";
  out << "input " << sided(map.input_basis()) << " " << map.input_basis().max_weight() << "\n";
  out << "output " << sided(map.output_basis()) << " " << map.output_basis().max_weight() << "\n";
  const bool two = map.output_basis().two_sided_basis();
  for (std::size_t i = 0; i < map.rows(); ++i) {
    out << "row " << map.output_basis()[i].to_string(two) << " :";
    for (std::size_t j = 0; j < map.cols(); ++j) {
      out << (j ? " ; " : " ") << render(map.entry(i, j), RenderStyle::kRaw, RenderFormat::kPlain);
    }
    out << "\n";
  }
}

TransferMap read_transfer_map(std::istream& in, std::string_view source_name) {
  const std::string src(source_name);
  std::map<std::string, std::string> header;
  std::vector<std::string> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto space = line.find(' ');
    std::string tag = line.substr(0, space);
    std::string rest = space == std::string::npos ? "" : line.substr(space + 1);
    if (tag == "row") {
      rows.push_back(rest);
    } else if (tag == "theorem" || tag == "n" || tag == "N" || tag == "sigma2" || tag == "input" || tag == "output") {
      header[tag] = rest;
    } else {
      throw FormatError(src + ":" + std::to_string(lineno) + ": unknown record '" + tag + "'");
    }
  }
  for (const char* required : {"theorem", "n", "N", "sigma2", "input", "output"})
    if (!header.count(required)) throw FormatError(src + ": missing '" + required + "' record");
  auto basis = [&](const std::string& text) {
    std::istringstream is(text);
    std::string sided;
    int w = -1;
    if (!(is >> sided >> w) || w < 0 || (sided != "one" && sided != "two"))
      throw FormatError(src + ": malformed basis record '" + text + "'");
    return sided == "two" ? Basis::two_sided(w) : Basis::one_sided(w);
  };
  try {
    Basis input = basis(header["input"]);
    Basis output = basis(header["output"]);
    if (rows.size() != output.size()) throw FormatError(src + ": expected " + std::to_string(output.size()) + " rows");
    std::vector<CoeffPoly> entries;
    entries.reserve(input.size() * output.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto colon = rows[i].find(':');
      if (colon == std::string::npos) throw FormatError(src + ": row without ':'");
      std::string body = rows[i].substr(colon + 1);
      std::size_t count = 0, pos = 0;
      for (;;) {
        auto semi = body.find(';', pos);
        entries.push_back(parse_coeff_poly(body.substr(pos, semi == std::string::npos ? std::string::npos : semi - pos)));
        ++count;
        if (semi == std::string::npos) break;
        pos = semi + 1;
      }
      if (count != input.size()) throw FormatError(src + ": row " + std::to_string(i) + " has the wrong length");
    }
    Dimensions dims{std::stol(header["n"]), std::stol(header["N"])};
    return TransferMap(theorem_from_name(header["theorem"]), std::move(input), std::move(output), std::move(entries),
                       dims, parse_rational(header["sigma2"]));
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(src + ": " + e.what());
  }
}

}  // namespace gaussmom
