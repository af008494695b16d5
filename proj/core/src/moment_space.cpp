#include "gaussmom/moment_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace gaussmom {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (std::isfinite(v) && s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

bool looks_exact(std::string_view text) { return text.find_first_of(".eE") == std::string_view::npos; }

}  // namespace

MomentKey::MomentKey(std::vector<int> parts) : parts_(std::move(parts)) {
  for (int p : parts_) {
    if (p <= 0) throw std::invalid_argument("moment key parts must be positive");
    weight_ += p;
  }
  std::sort(parts_.begin(), parts_.end(), std::greater<>());
}

MomentKey MomentKey::with_part(int part) const {
  std::vector<int> parts = parts_;
  parts.push_back(part);
  return MomentKey(std::move(parts));
}

std::string MomentKey::to_string() const {
  if (parts_.empty()) return "-";
  std::string out;
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(parts_[i]);
  }
  return out;
}

MomentKey MomentKey::parse(std::string_view text) {
  std::string t = trim(text);
  if (t == "-" || t.empty()) return MomentKey();
  std::vector<int> parts;
  std::size_t pos = 0;
  while (pos <= t.size()) {
    std::size_t comma = t.find(',', pos);
    std::string item = trim(std::string_view(t).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (item.empty() || !std::all_of(item.begin(), item.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      throw std::invalid_argument("malformed moment key '" + t + "'");
    int v = std::stoi(item);
    if (v <= 0) throw std::invalid_argument("moment key parts must be positive: '" + t + "'");
    parts.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return MomentKey(std::move(parts));
}

std::strong_ordering operator<=>(const MomentKey& a, const MomentKey& b) {
  if (a.weight_ != b.weight_) return a.weight_ <=> b.weight_;
  // Reverse lexicographic: larger leading parts first.
  std::size_t m = std::min(a.parts_.size(), b.parts_.size());
  for (std::size_t i = 0; i < m; ++i)
    if (a.parts_[i] != b.parts_[i]) return b.parts_[i] <=> a.parts_[i];
  return a.parts_.size() <=> b.parts_.size();
}

std::string PairMomentKey::to_string(bool two_sided) const {
  if (!two_sided) return r_parts.to_string();
  return r_parts.to_string() + "|" + s_parts.to_string();
}

std::strong_ordering operator<=>(const PairMomentKey& a, const PairMomentKey& b) {
  if (auto c = a.s_parts <=> b.s_parts; c != 0) return c;
  return a.r_parts <=> b.r_parts;
}

std::vector<MomentKey> partitions_of(int w) {
  std::vector<MomentKey> out;
  if (w == 0) {
    out.emplace_back();
    return out;
  }
  std::vector<int> current;
  std::function<void(int, int)> rec = [&](int remaining, int max_part) {
    if (remaining == 0) {
      out.emplace_back(current);
      return;
    }
    for (int part = std::min(remaining, max_part); part >= 1; --part) {
      current.push_back(part);
      rec(remaining - part, part);
      current.pop_back();
    }
  };
  rec(w, w);
  return out;
}

long partition_count(int w) {
  std::vector<long> p(static_cast<std::size_t>(std::max(w, 0)) + 1, 0);
  p[0] = 1;
  for (int part = 1; part <= w; ++part)
    for (int s = part; s <= w; ++s) p[static_cast<std::size_t>(s)] += p[static_cast<std::size_t>(s - part)];
  return p[static_cast<std::size_t>(std::max(w, 0))];
}

Basis Basis::one_sided(int max_weight) {
  if (max_weight < 0) throw std::invalid_argument("negative maximum weight");
  std::vector<PairMomentKey> keys;
  for (int w = 0; w <= max_weight; ++w)
    for (auto& k : partitions_of(w)) keys.push_back({std::move(k), {}});
  return from_keys(Sidedness::kOne, max_weight, std::move(keys));
}

Basis Basis::two_sided(int max_weight) {
  Basis one = one_sided(max_weight);
  std::vector<PairMomentKey> keys;
  for (const auto& s : one.keys())
    for (const auto& r : one.keys()) keys.push_back({r.r_parts, s.r_parts});
  return from_keys(Sidedness::kTwo, max_weight, std::move(keys));
}

Basis Basis::from_keys(Sidedness sided, int max_weight, std::vector<PairMomentKey> keys) {
  Basis b;
  b.sided_ = sided;
  b.max_weight_ = max_weight;
  b.keys_ = std::move(keys);
  for (std::size_t i = 0; i < b.keys_.size(); ++i) {
    if (sided == Sidedness::kOne && !b.keys_[i].s_parts.empty())
      throw std::invalid_argument("one-sided basis with an S-side key");
    if (!b.index_.emplace(b.keys_[i], i).second)
      throw std::invalid_argument("duplicate basis key " + b.keys_[i].to_string(sided == Sidedness::kTwo));
  }
  return b;
}

std::optional<std::size_t> Basis::find(const PairMomentKey& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Basis::index_of(const PairMomentKey& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) throw std::out_of_range("moment key " + key.to_string(two_sided_basis()) + " not in basis");
  return it->second;
}

std::vector<std::size_t> Basis::weight_block(int weight) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < keys_.size(); ++i)
    if (keys_[i].r_parts.weight() == weight) out.push_back(i);
  return out;
}

MomentVector MomentVector::exact(Basis basis, std::vector<Rational> values) {
  if (values.size() != basis.size()) throw std::invalid_argument("moment vector size does not match its basis");
  MomentVector v;
  v.basis_ = std::move(basis);
  v.exact_ = true;
  v.exact_values_ = std::move(values);
  v.values_.reserve(v.exact_values_.size());
  for (const auto& q : v.exact_values_) v.values_.push_back(to_double(q));
  return v;
}

MomentVector MomentVector::approximate(Basis basis, std::vector<double> values) {
  if (values.size() != basis.size()) throw std::invalid_argument("moment vector size does not match its basis");
  MomentVector v;
  v.basis_ = std::move(basis);
  v.exact_ = false;
  v.values_ = std::move(values);
  return v;
}

double MomentVector::value(std::size_t i) const { return values_.at(i); }

const Rational& MomentVector::exact_value(std::size_t i) const {
  if (!exact_) throw std::logic_error("exact value requested from an approximate moment vector");
  return exact_values_.at(i);
}

std::vector<double> MomentVector::values() const { return values_; }

const std::vector<Rational>& MomentVector::exact_values() const {
  if (!exact_) throw std::logic_error("exact values requested from an approximate moment vector");
  return exact_values_;
}

MomentVector MomentVector::to_approximate() const { return approximate(basis_, values_); }

MomentVector MomentVector::restricted_to(const Basis& target) const {
  if (target.sidedness() != basis_.sidedness()) throw std::invalid_argument("basis sidedness mismatch");
  if (exact_) {
    std::vector<Rational> out;
    for (const auto& k : target.keys()) out.push_back(exact_values_[basis_.index_of(k)]);
    return exact(target, std::move(out));
  }
  std::vector<double> out;
  for (const auto& k : target.keys()) out.push_back(values_[basis_.index_of(k)]);
  return approximate(target, std::move(out));
}

void write_moment_vector(std::ostream& out, const MomentVector& v) {
  const bool two = v.basis().two_sided_basis();
  out << "# moments " << (two ? "two-sided" : "one-sided") << " P=" << v.basis().max_weight() << " "
      << (v.is_exact() ? "exact" : "approximate") << "\n";
  for (std::size_t i = 0; i < v.size(); ++i) {
    out << v.basis()[i].to_string(two) << " ";
    out << (v.is_exact() ? to_string(v.exact_value(i)) : format_double(v.value(i))) << "\n";
  }
}

namespace {

MomentVector assemble(const std::vector<std::pair<PairMomentKey, std::string>>& records, bool two,
                      std::string_view source) {
  int max_weight = 0;
  for (const auto& [k, _] : records) max_weight = std::max({max_weight, k.r_parts.weight(), k.s_parts.weight()});
  Basis basis = two ? Basis::two_sided(max_weight) : Basis::one_sided(max_weight);
  if (records.size() != basis.size())
    throw FormatError(std::string(source) + ": expected " + std::to_string(basis.size()) + " moments for weight " +
                      std::to_string(max_weight) + ", found " + std::to_string(records.size()));
  bool exact = std::all_of(records.begin(), records.end(), [](const auto& r) { return looks_exact(r.second); });
  std::vector<Rational> q(basis.size());
  std::vector<double> d(basis.size());
  std::vector<bool> seen(basis.size(), false);
  for (const auto& [k, text] : records) {
    auto idx = basis.find(k);
    if (!idx) throw FormatError(std::string(source) + ": key " + k.to_string(two) + " outside the basis");
    if (seen[*idx]) throw FormatError(std::string(source) + ": duplicate key " + k.to_string(two));
    seen[*idx] = true;
    try {
      if (exact) {
        q[*idx] = parse_rational(text);
      } else {
        std::size_t used = 0;
        d[*idx] = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
      }
    } catch (const std::exception&) {
      throw FormatError(std::string(source) + ": malformed value '" + text + "' for key " + k.to_string(two));
    }
  }
  if (exact) return MomentVector::exact(std::move(basis), std::move(q));
  return MomentVector::approximate(std::move(basis), std::move(d));
}

PairMomentKey parse_pair_key(const std::string& text, bool two) {
  if (!two) return {MomentKey::parse(text), {}};
  auto bar = text.find('|');
  return {MomentKey::parse(text.substr(0, bar)), MomentKey::parse(text.substr(bar + 1))};
}

}  // namespace

MomentVector read_moment_vector(std::istream& in, std::string_view source_name) {
  std::vector<std::pair<std::string, std::string>> raw;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::istringstream ls(t);
    std::string key, value, extra;
    if (!(ls >> key >> value) || (ls >> extra))
      throw FormatError(std::string(source_name) + ":" + std::to_string(lineno) + ": expected '<key> <value>'");
    raw.emplace_back(key, value);
  }
  if (raw.empty()) throw FormatError(std::string(source_name) + ": no moments");
  bool two = raw.front().first.find('|') != std::string::npos;
  std::vector<std::pair<PairMomentKey, std::string>> records;
  for (const auto& [k, v] : raw) {
    if ((k.find('|') != std::string::npos) != two)
      throw FormatError(std::string(source_name) + ": mixed one-sided and two-sided keys");
    try {
      records.emplace_back(parse_pair_key(k, two), v);
    } catch (const std::invalid_argument& e) {
      throw FormatError(std::string(source_name) + ": " + e.what());
    }
  }
  return assemble(records, two, source_name);
}

void write_moment_vector_file(const std::string& path, const MomentVector& v) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write moment file " + path);
  write_moment_vector(out, v);
}

MomentVector read_moment_vector_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open moment file " + path);
  return read_moment_vector(in, path);
}

std::string moment_vector_to_json(const MomentVector& v) {
  const bool two = v.basis().two_sided_basis();
  nlohmann::ordered_json j;
  j["sided"] = two ? "two" : "one";
  j["max_weight"] = v.basis().max_weight();
  j["exact"] = v.is_exact();
  nlohmann::ordered_json values = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v.is_exact())
      values[v.basis()[i].to_string(two)] = to_string(v.exact_value(i));
    else
      values[v.basis()[i].to_string(two)] = v.value(i);
  }
  j["values"] = std::move(values);
  return j.dump(2);
}

MomentVector moment_vector_from_json(std::string_view json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("moment JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("values") || !j["values"].is_object())
    throw FormatError("moment JSON: missing 'values' object");
  bool two = j.value("sided", std::string("one")) == "two";
  std::vector<std::pair<PairMomentKey, std::string>> records;
  for (const auto& [k, val] : j["values"].items()) {
    std::string text;
    if (val.is_string()) {
      text = val.get<std::string>();
    } else if (val.is_number_integer()) {
      text = std::to_string(val.get<long long>());
    } else if (val.is_number()) {
      text = format_double(val.get<double>());
    } else {
      throw FormatError("moment JSON: value for key " + k + " is not a number");
    }
    try {
      records.emplace_back(parse_pair_key(k, two), text);
    } catch (const std::invalid_argument& e) {
      throw FormatError(std::string("moment JSON: ") + e.what());
    }
  }
  if (records.empty()) throw FormatError("moment JSON: no moments");
  return assemble(records, two, "moment JSON");
}

namespace {

template <typename T, typename Make>
MomentVector from_power_traces(const std::vector<T>& traces, int max_weight, Make make) {
  Basis basis = Basis::one_sided(max_weight);
  std::vector<T> values;
  values.reserve(basis.size());
  for (const auto& k : basis.keys()) {
    T v = T(1);
    for (int p : k.r_parts.parts()) v *= traces[static_cast<std::size_t>(p)];
    values.push_back(v);
  }
  return make(std::move(basis), std::move(values));
}

}  // namespace

MomentVector eval_mixed_moments(const Matrix& a, int max_weight) {
  if (a.rows() != a.cols()) throw std::invalid_argument("mixed moments need a square matrix");
  if (a.rows() == 0) throw std::invalid_argument("mixed moments of an empty matrix");
  std::vector<double> traces(static_cast<std::size_t>(max_weight) + 1, 1.0);
  Matrix power = Matrix::Identity(a.rows(), a.cols());
  for (int p = 1; p <= max_weight; ++p) {
    power = power * a;
    traces[static_cast<std::size_t>(p)] = power.trace().real() / static_cast<double>(a.rows());
  }
  return from_power_traces(traces, max_weight, &MomentVector::approximate);
}

MomentVector eval_mixed_moments(std::span<const double> eigenvalues, int max_weight) {
  if (eigenvalues.empty()) throw std::invalid_argument("mixed moments of an empty spectrum");
  std::vector<double> traces(static_cast<std::size_t>(max_weight) + 1, 0.0);
  traces[0] = 1.0;
  for (int p = 1; p <= max_weight; ++p) {
    double s = 0.0;
    for (double l : eigenvalues) s += std::pow(l, p);
    traces[static_cast<std::size_t>(p)] = s / static_cast<double>(eigenvalues.size());
  }
  return from_power_traces(traces, max_weight, &MomentVector::approximate);
}

MomentVector eval_mixed_moments(std::span<const Rational> eigenvalues, int max_weight) {
  if (eigenvalues.empty()) throw std::invalid_argument("mixed moments of an empty spectrum");
  std::vector<Rational> traces(static_cast<std::size_t>(max_weight) + 1, Rational(0));
  traces[0] = 1;
  for (int p = 1; p <= max_weight; ++p) {
    Rational s = 0;
    for (const auto& l : eigenvalues) s += pow(l, p);
    traces[static_cast<std::size_t>(p)] = s / Rational(static_cast<long>(eigenvalues.size()));
  }
  return from_power_traces(traces, max_weight, &MomentVector::exact);
}

MomentVector combine_two_sided(const MomentVector& r_side, const MomentVector& s_side) {
  if (r_side.basis().two_sided_basis() || s_side.basis().two_sided_basis())
    throw std::invalid_argument("combine_two_sided expects one-sided inputs");
  int max_weight = std::min(r_side.basis().max_weight(), s_side.basis().max_weight());
  Basis basis = Basis::two_sided(max_weight);
  if (r_side.is_exact() && s_side.is_exact()) {
    std::vector<Rational> out;
    for (const auto& k : basis.keys()) out.push_back(r_side.exact_value(k.r_parts) * s_side.exact_value(k.s_parts));
    return MomentVector::exact(std::move(basis), std::move(out));
  }
  std::vector<double> out;
  for (const auto& k : basis.keys()) out.push_back(r_side.value(k.r_parts) * s_side.value(k.s_parts));
  return MomentVector::approximate(std::move(basis), std::move(out));
}

MomentVector eval_mixed_moments(const Matrix& r, const Matrix& s, int max_weight) {
  return combine_two_sided(eval_mixed_moments(r, max_weight), eval_mixed_moments(s, max_weight));
}

void DetMatrixSet::add(std::string label, Matrix m) { matrices_[std::move(label)] = std::move(m); }

const Matrix& DetMatrixSet::at(const std::string& label) const {
  auto it = matrices_.find(label);
  if (it == matrices_.end()) throw std::invalid_argument("no matrix labelled '" + label + "'");
  return it->second;
}

Complex d_rho(const DetMatrixSet& matrices, const SetPartition& rho, std::span<const std::string> word) {
  Complex result = 1.0;
  for (const auto& block : rho.blocks()) {
    Matrix product;
    std::string first;
    for (int j : block) {
      if (j < 1 || static_cast<std::size_t>(j) > word.size())
        throw std::invalid_argument("word does not cover element " + std::to_string(j));
      const std::string& label = word[static_cast<std::size_t>(j - 1)];
      const Matrix& m = matrices.at(label);
      if (product.size() == 0) {
        product = m;
        first = label;
        continue;
      }
      if (product.cols() != m.rows())
        throw std::invalid_argument("dimension mismatch multiplying " + std::to_string(product.rows()) + "x" +
                                    std::to_string(product.cols()) + " by '" + label + "' (" +
                                    std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ")");
      product = product * m;
    }
    if (product.rows() != product.cols())
      throw std::invalid_argument("block product starting at '" + first + "' is not square (" +
                                  std::to_string(product.rows()) + "x" + std::to_string(product.cols()) + ")");
    result *= product.trace() / static_cast<double>(product.rows());
  }
  return result;
}

}  // namespace gaussmom
