#include <cctype>
#include <string>

#include "gaussmom/model.hpp"

namespace gaussmom {

namespace {

class ModelParser {
 public:
  explicit ModelParser(std::string_view text) : text_(text) {}

  ModelExpr parse() {
    ModelExpr e = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { fail_at(pos_, what); }
  [[noreturn]] void fail_at(std::size_t at, const std::string& what) const {
    std::string near = at < text_.size() ? " near '" + std::string(text_.substr(at, 12)) + "'" : " at end of input";
    throw ModelSyntaxError(at, what + near);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!consume(c)) fail(std::string("expected '") + c + "'");
  }

  std::string identifier() {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    if (start == pos_) fail("expected a name");
    return std::string(text_.substr(start, pos_ - start));
  }

  long positive_integer(const char* what) {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail(std::string("expected ") + what);
    std::string digits(text_.substr(start, pos_ - start));
    if (digits.size() > 9) fail_at(start, std::string(what) + " is too large");
    long v = std::stol(digits);
    if (v < 1) fail_at(start, std::string(what) + " must be positive");
    return v;
  }

  Rational number(const char* what, bool allow_negative) {
    skip_space();
    std::size_t start = pos_;
    if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) ++pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
                                   text_[pos_] == '/' ||
                                   ((text_[pos_] == '-' || text_[pos_] == '+') && pos_ > start &&
                                    (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E'))))
      ++pos_;
    if (start == pos_) fail(std::string("expected ") + what);
    Rational v;
    try {
      v = parse_rational(text_.substr(start, pos_ - start));
    } catch (const std::invalid_argument&) {
      fail_at(start, std::string("malformed ") + what);
    }
    if (!allow_negative && v < 0) fail_at(start, std::string(what) + " must be nonnegative");
    return v;
  }

  ModelExpr gaussian_term() {
    skip_space();
    std::size_t at = pos_;
    std::string head = identifier();
    if (head != "gC" && head != "gSA") fail_at(at, "expected gC(...) or gSA(...)");
    pos_ = at;
    return expr();
  }

  ModelExpr expr() {
    skip_space();
    std::size_t at = pos_;
    std::string head = identifier();
    ModelExpr e;
    expect('(');
    if (head == "det") {
      skip_space();
      std::size_t name_at = pos_;
      std::string name;
      if (pos_ < text_.size() && text_[pos_] == '0') {
        ++pos_;
        name = "0";
        if (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_])))
          fail_at(name_at, "names must not start with a digit");
      } else {
        name = identifier();
        if (std::isdigit(static_cast<unsigned char>(name[0]))) fail_at(name_at, "names must not start with a digit");
      }
      expect(',');
      skip_space();
      long rows = positive_integer("row count");
      skip_space();
      if (pos_ >= text_.size() || (text_[pos_] != 'x' && text_[pos_] != 'X')) fail("expected 'x' in dimensions");
      ++pos_;
      long cols = positive_integer("column count");
      e = det(name, rows, cols);
    } else if (head == "gC") {
      long n = positive_integer("n");
      expect(',');
      long N = positive_integer("N");
      Rational sigma = 1;
      if (consume(',')) sigma = number("sigma", false);
      e = gauss_complex(n, N, sigma);
    } else if (head == "gSA") {
      long n = positive_integer("n");
      Rational sigma = 1;
      if (consume(',')) sigma = number("sigma", false);
      e = gauss_selfadjoint(n, sigma);
    } else if (head == "sum") {
      ModelExpr base = expr();
      expect(',');
      ModelExpr noise = gaussian_term();
      if (noise.kind == NodeKind::kGaussSelfAdjoint) {
        e = selfadj_sum(std::move(base), noise.n, noise.sigma);
      } else {
        e = gauss_sum(std::move(base), std::move(noise));
      }
    } else if (head == "wprod") {
      ModelExpr r = expr();
      expect(',');
      ModelExpr s = expr();
      expect(',');
      long n = positive_integer("n");
      expect(',');
      long N = positive_integer("N");
      e = corr_product(std::move(r), std::move(s), n, N);
    } else if (head == "chain") {
      ModelExpr base = expr();
      std::vector<ModelExpr> factors;
      while (consume(',')) {
        skip_space();
        std::size_t factor_at = pos_;
        ModelExpr g = gaussian_term();
        if (g.kind != NodeKind::kGaussComplex) fail_at(factor_at, "chain factors must be gC(...)");
        factors.push_back(std::move(g));
      }
      if (factors.empty()) fail("chain needs at least one gC factor");
      e = chain(std::move(base), std::move(factors));
    } else if (head == "saprod") {
      ModelExpr base = expr();
      expect(',');
      long n = positive_integer("n");
      e = selfadj_product(std::move(base), n);
    } else if (head == "sasum") {
      ModelExpr base = expr();
      expect(',');
      long n = positive_integer("n");
      Rational sigma = 1;
      if (consume(',')) sigma = number("sigma", false);
      e = selfadj_sum(std::move(base), n, sigma);
    } else if (head == "scale") {
      ModelExpr base = expr();
      expect(',');
      Rational factor = number("scale factor", true);
      e = scale(std::move(base), factor);
    } else {
      fail_at(at, "unknown model term '" + head + "'");
    }
    expect(')');
    e.position = at;
    return e;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

// Terminating decimals print as decimals, anything else as num/den.
std::string number_text(const Rational& q) {
  BigInt den = q.get_den();
  int twos = 0, fives = 0;
  while (den % 2 == 0) {
    den /= 2;
    ++twos;
  }
  while (den % 5 == 0) {
    den /= 5;
    ++fives;
  }
  if (den != 1) return to_string(q);
  int digits = std::max(twos, fives);
  if (digits == 0) return q.get_num().get_str();
  BigInt pow10 = 1;
  for (int i = 0; i < digits; ++i) pow10 *= 10;
  BigInt scaled = abs(q.get_num()) * pow10 / q.get_den();
  std::string s = scaled.get_str();
  if (static_cast<int>(s.size()) <= digits) s.insert(0, static_cast<std::size_t>(digits) + 1 - s.size(), '0');
  s.insert(s.size() - static_cast<std::size_t>(digits), ".");
  return (q < 0 ? "-" : "") + s;
}

void render_into(const ModelExpr& m, std::string& out) {
  auto sigma = [&](const Rational& s) {
    if (s != 1) out += ", " + number_text(s);
  };
  switch (m.kind) {
    case NodeKind::kDet:
      out += "det(" + m.name + ", " + std::to_string(m.rows) + "x" + std::to_string(m.cols) + ")";
      return;
    case NodeKind::kGaussComplex:
      out += "gC(" + std::to_string(m.n) + ", " + std::to_string(m.N);
      sigma(m.sigma);
      out += ")";
      return;
    case NodeKind::kGaussSelfAdjoint:
      out += "gSA(" + std::to_string(m.n);
      sigma(m.sigma);
      out += ")";
      return;
    case NodeKind::kCorrProduct:
      out += "wprod(";
      render_into(m.children[0], out);
      out += ", ";
      render_into(m.children[1], out);
      out += ", " + std::to_string(m.n) + ", " + std::to_string(m.N) + ")";
      return;
    case NodeKind::kGaussSum:
      out += "sum(";
      render_into(m.children[0], out);
      out += ", ";
      render_into(m.children[1], out);
      out += ")";
      return;
    case NodeKind::kSelfAdjProduct:
      out += "saprod(";
      render_into(m.children[0], out);
      out += ", " + std::to_string(m.n) + ")";
      return;
    case NodeKind::kSelfAdjSum:
      out += "sasum(";
      render_into(m.children[0], out);
      out += ", " + std::to_string(m.n);
      sigma(m.sigma);
      out += ")";
      return;
    case NodeKind::kChain:
      out += "chain(";
      for (std::size_t i = 0; i < m.children.size(); ++i) {
        if (i) out += ", ";
        render_into(m.children[i], out);
      }
      out += ")";
      return;
    case NodeKind::kScale:
      out += "scale(";
      render_into(m.children[0], out);
      out += ", " + number_text(m.factor) + ")";
      return;
  }
}

}  // namespace

ModelExpr parse_model(std::string_view text) {
  ModelExpr m = ModelParser(text).parse();
  check_dimensions(m);
  return m;
}

std::string render_model(const ModelExpr& model) {
  std::string out;
  render_into(model, out);
  return out;
}

}  // namespace gaussmom
