#include "gaussmom/coeff_poly.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <vector>

namespace gaussmom {

CoeffPoly::CoeffPoly(const Rational& constant) {
  if (constant != 0) terms_.emplace(Exponents{0, 0}, constant);
}

CoeffPoly::CoeffPoly(long constant) : CoeffPoly(Rational(constant)) {}

CoeffPoly CoeffPoly::monomial(const Rational& coefficient, int n_exponent, int N_exponent) {
  CoeffPoly p;
  p.add_term(coefficient, n_exponent, N_exponent);
  return p;
}

bool CoeffPoly::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == Exponents{0, 0});
}

bool CoeffPoly::depends_on_N() const {
  for (const auto& [e, c] : terms_) {
    if (e.second != 0) return true;
  }
  return false;
}

bool CoeffPoly::depends_on_n() const {
  for (const auto& [e, c] : terms_) {
    if (e.first != 0) return true;
  }
  return false;
}

Rational CoeffPoly::coefficient(int n_exponent, int N_exponent) const {
  auto it = terms_.find({n_exponent, N_exponent});
  return it == terms_.end() ? Rational(0) : it->second;
}

void CoeffPoly::add_term(const Rational& coefficient, int n_exponent, int N_exponent) {
  if (coefficient == 0) return;
  auto [it, inserted] = terms_.try_emplace(Exponents{n_exponent, N_exponent}, coefficient);
  if (!inserted) {
    it->second += coefficient;
    if (it->second == 0) terms_.erase(it);
  }
}

CoeffPoly& CoeffPoly::operator+=(const CoeffPoly& other) {
  for (const auto& [e, c] : other.terms_) add_term(c, e.first, e.second);
  return *this;
}

CoeffPoly& CoeffPoly::operator-=(const CoeffPoly& other) {
  for (const auto& [e, c] : other.terms_) add_term(-c, e.first, e.second);
  return *this;
}

CoeffPoly operator*(const CoeffPoly& a, const CoeffPoly& b) {
  CoeffPoly out;
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) {
      out.add_term(ca * cb, ea.first + eb.first, ea.second + eb.second);
    }
  }
  return out;
}

CoeffPoly& CoeffPoly::operator*=(const CoeffPoly& other) {
  *this = *this * other;
  return *this;
}

CoeffPoly& CoeffPoly::operator*=(const Rational& factor) {
  if (factor == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, c] : terms_) c *= factor;
  return *this;
}

CoeffPoly operator-(const CoeffPoly& a) {
  CoeffPoly out = a;
  for (auto& [e, c] : out.terms_) c = -c;
  return out;
}

Rational CoeffPoly::eval(const Rational& n, const Rational& N) const {
  Rational sum = 0;
  for (const auto& [e, c] : terms_) sum += c * pow(n, e.first) * pow(N, e.second);
  return sum;
}

CoeffPoly CoeffPoly::homogeneous_part(int degree) const {
  CoeffPoly out;
  for (const auto& [e, c] : terms_) {
    if (e.first + e.second == degree) out.add_term(c, e.first, e.second);
  }
  return out;
}

CoeffPoly negate(const CoeffPoly& x) { return -x; }

CoeffPoly scale(const CoeffPoly& x, const Rational& factor) { return x * factor; }

// ---------------------------------------------------------------------------
// Rendering

namespace {

std::string power(std::string_view symbol, int exponent, RenderFormat format) {
  std::string s(symbol);
  if (exponent == 1) return s;
  if (format == RenderFormat::kLatex) return s + "^{" + std::to_string(exponent) + "}";
  return s + "^" + std::to_string(exponent);
}

// |coefficient| * c^a * N^e as a (possibly fractional) monomial without sign.
std::string c_monomial(const Rational& magnitude, int c_exp, int n_exp, RenderFormat format,
                       std::string_view dim = "N") {
  std::vector<std::string> num_factors;
  std::vector<std::string> den_factors;
  if (magnitude.get_num() != 1) num_factors.push_back(magnitude.get_num().get_str());
  if (magnitude.get_den() != 1) den_factors.push_back(magnitude.get_den().get_str());
  if (c_exp > 0) num_factors.push_back(power("c", c_exp, format));
  if (c_exp < 0) den_factors.push_back(power("c", -c_exp, format));
  if (n_exp > 0) num_factors.push_back(power(dim, n_exp, format));
  if (n_exp < 0) den_factors.push_back(power(dim, -n_exp, format));

  std::string num;
  for (const auto& f : num_factors) num += f;
  if (num.empty()) num = "1";
  if (den_factors.empty()) return num;

  std::string den;
  for (const auto& f : den_factors) den += f;
  if (format == RenderFormat::kLatex) return "\\frac{" + num + "}{" + den + "}";
  if (den_factors.size() > 1) den = "(" + den + ")";
  if (num_factors.size() > 1) num = "(" + num + ")";
  return num + "/" + den;
}

struct SignedPiece {
  bool negative;
  std::string body;
};

std::string join(const std::vector<SignedPiece>& pieces) {
  std::string out;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (i == 0) {
      if (pieces[i].negative) out += "-";
    } else {
      out += pieces[i].negative ? "-" : "+";
    }
    out += pieces[i].body;
  }
  return out.empty() ? "0" : out;
}

std::string render_raw(const CoeffPoly& x, RenderFormat format) {
  // Descending total degree, then descending power of n.
  std::vector<std::pair<CoeffPoly::Exponents, Rational>> terms(x.terms().begin(), x.terms().end());
  std::stable_sort(terms.begin(), terms.end(), [](const auto& l, const auto& r) {
    int dl = l.first.first + l.first.second;
    int dr = r.first.first + r.first.second;
    if (dl != dr) return dl > dr;
    return l.first.first > r.first.first;
  });
  std::vector<SignedPiece> pieces;
  for (const auto& [e, c] : terms) {
    Rational mag = abs(c);
    std::vector<std::string> factors;
    bool plain_one = mag == 1 && (e.first != 0 || e.second != 0);
    if (!plain_one) {
      if (format == RenderFormat::kLatex && mag.get_den() != 1) {
        factors.push_back("\\frac{" + mag.get_num().get_str() + "}{" + mag.get_den().get_str() + "}");
      } else {
        factors.push_back(to_string(mag));
      }
    }
    auto sym = [&](std::string_view s, int k) {
      if (k == 0) return;
      if (format == RenderFormat::kLatex) {
        factors.push_back(k == 1 ? std::string(s) : std::string(s) + "^{" + std::to_string(k) + "}");
      } else {
        factors.push_back(k == 1 ? std::string(s) : std::string(s) + "^" + std::to_string(k));
      }
    };
    sym("n", e.first);
    sym("N", e.second);
    std::string body;
    for (std::size_t i = 0; i < factors.size(); ++i) {
      if (i > 0 && format == RenderFormat::kPlain) body += "*";
      body += factors[i];
    }
    pieces.push_back({c < 0, body});
  }
  return join(pieces);
}

std::string render_c(const CoeffPoly& x, RenderFormat format) {
  // Group by the power of N after substituting n = cN.
  std::map<int, std::map<int, Rational>, std::greater<>> groups;
  for (const auto& [e, c] : x.terms()) groups[e.first + e.second][e.first] = c;

  std::vector<SignedPiece> pieces;
  for (const auto& [n_exp, group] : groups) {
    bool has_negative_c = false;
    for (const auto& [a, c] : group) has_negative_c |= a < 0;
    if (n_exp == 0 || group.size() == 1 || has_negative_c) {
      for (const auto& [a, c] : group) pieces.push_back({c < 0, c_monomial(abs(c), a, n_exp, format)});
      continue;
    }
    std::vector<SignedPiece> inner;
    for (const auto& [a, c] : group) inner.push_back({c < 0, c_monomial(abs(c), a, 0, format)});
    std::string numerator = join(inner);
    std::string body;
    if (n_exp < 0) {
      std::string den = power("N", -n_exp, format);
      body = format == RenderFormat::kLatex ? "\\frac{" + numerator + "}{" + den + "}"
                                            : "(" + numerator + ")/" + den;
    } else {
      body = "(" + numerator + ")" + power("N", n_exp, format);
    }
    pieces.push_back({false, body});
  }
  return join(pieces);
}

// Polynomials in n alone (selfadjoint maps) have nothing to substitute.
std::string render_n(const CoeffPoly& x, RenderFormat format) {
  std::vector<SignedPiece> pieces;
  for (auto it = x.terms().rbegin(); it != x.terms().rend(); ++it) {
    pieces.push_back({it->second < 0, c_monomial(abs(it->second), 0, it->first.first, format, "n")});
  }
  return join(pieces);
}

}  // namespace

std::string render(const CoeffPoly& x, RenderStyle style, RenderFormat format) {
  if (x.is_zero()) return "0";
  if (style == RenderStyle::kRaw) return render_raw(x, format);
  return x.depends_on_N() ? render_c(x, format) : render_n(x, format);
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class PolyParser {
 public:
  explicit PolyParser(std::string_view text) : text_(text) {}

  CoeffPoly parse() {
    CoeffPoly value = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected character");
    return value;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("coefficient parse error at position " + std::to_string(pos_) + ": " + what +
                                " in '" + std::string(text_) + "'");
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      } else if (text_.substr(pos_, 2) == "\\,") {
        pos_ += 2;
      } else {
        break;
      }
    }
  }

  bool consume(std::string_view token) {
    skip_space();
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view token) {
    if (!consume(token)) fail("expected '" + std::string(token) + "'");
  }

  CoeffPoly expr() {
    skip_space();
    bool negative = false;
    if (consume("-")) {
      negative = true;
    } else {
      consume("+");
    }
    CoeffPoly value = term();
    if (negative) value = -value;
    for (;;) {
      if (consume("+")) {
        value += term();
      } else if (consume("-")) {
        value -= term();
      } else {
        return value;
      }
    }
  }

  bool starts_primary() {
    skip_space();
    if (pos_ >= text_.size()) return false;
    char ch = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.' || ch == '(' || ch == '{' || ch == 'n' ||
        ch == 'N' || ch == 'c') {
      return true;
    }
    return text_.substr(pos_, 5) == "\\frac" || text_.substr(pos_, 6) == "\\left(";
  }

  CoeffPoly term() {
    CoeffPoly value = factor();
    for (;;) {
      if (consume("*") || consume("\\cdot")) {
        value *= factor();
      } else if (consume("/")) {
        value = divide(value, factor());
      } else if (starts_primary()) {
        value *= factor();
      } else {
        return value;
      }
    }
  }

  CoeffPoly divide(const CoeffPoly& numerator, const CoeffPoly& denominator) {
    if (denominator.terms().size() != 1) fail("division by a non-monomial");
    const auto& [e, c] = *denominator.terms().begin();
    return numerator * CoeffPoly::monomial(1 / c, -e.first, -e.second);
  }

  CoeffPoly factor() {
    CoeffPoly base = primary();
    if (!consume("^")) return base;
    int exponent = exponent_literal();
    if (exponent >= 0) {
      CoeffPoly out = 1L;
      for (int i = 0; i < exponent; ++i) out *= base;
      return out;
    }
    if (base.terms().size() != 1) fail("negative power of a non-monomial");
    const auto& [e, c] = *base.terms().begin();
    return CoeffPoly::monomial(pow(c, exponent), e.first * exponent, e.second * exponent);
  }

  int exponent_literal() {
    bool braced = consume("{");
    skip_space();
    bool negative = false;
    if (consume("-")) negative = true;
    skip_space();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected integer exponent");
    int value = std::stoi(std::string(text_.substr(start, pos_ - start)));
    if (braced) expect("}");
    return negative ? -value : value;
  }

  CoeffPoly primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char ch = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
        ++pos_;
      }
      return CoeffPoly(parse_rational(text_.substr(start, pos_ - start)));
    }
    if (ch == 'n') {
      ++pos_;
      return CoeffPoly::monomial(1, 1, 0);
    }
    if (ch == 'N') {
      ++pos_;
      return CoeffPoly::monomial(1, 0, 1);
    }
    if (ch == 'c') {
      ++pos_;
      return CoeffPoly::monomial(1, 1, -1);
    }
    if (consume("\\left(")) {
      CoeffPoly inner = expr();
      expect("\\right)");
      return inner;
    }
    if (consume("(")) {
      CoeffPoly inner = expr();
      expect(")");
      return inner;
    }
    if (consume("\\frac")) {
      expect("{");
      CoeffPoly num = expr();
      expect("}");
      expect("{");
      CoeffPoly den = expr();
      expect("}");
      return divide(num, den);
    }
    if (consume("{")) {
      CoeffPoly inner = expr();
      expect("}");
      return inner;
    }
    fail("unexpected character");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

CoeffPoly parse_coeff_poly(std::string_view text) { return PolyParser(text).parse(); }

}  // namespace gaussmom
