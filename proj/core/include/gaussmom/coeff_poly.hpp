#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>

#include "gaussmom/rational.hpp"

namespace gaussmom {

// A Laurent polynomial in the two matrix dimensions n and N with exact
// rational coefficients. Every transfer-map entry is one of these.
//
// Terms are keyed by (a, b), meaning n^a N^b. Zero coefficients are never
// stored, so structural equality is polynomial equality.
class CoeffPoly {
 public:
  using Exponents = std::pair<int, int>;
  using Terms = std::map<Exponents, Rational>;

  CoeffPoly() = default;
  CoeffPoly(const Rational& constant);  // NOLINT(google-explicit-constructor)
  CoeffPoly(long constant);             // NOLINT(google-explicit-constructor)

  static CoeffPoly monomial(const Rational& coefficient, int n_exponent, int N_exponent);

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  // True when no term carries a power of N (selfadjoint maps).
  bool depends_on_N() const;
  bool depends_on_n() const;
  // Coefficient of n^a N^b (zero when absent).
  Rational coefficient(int n_exponent, int N_exponent) const;

  // Adds c * n^a N^b in place.
  void add_term(const Rational& coefficient, int n_exponent, int N_exponent);

  CoeffPoly& operator+=(const CoeffPoly& other);
  CoeffPoly& operator-=(const CoeffPoly& other);
  CoeffPoly& operator*=(const CoeffPoly& other);
  CoeffPoly& operator*=(const Rational& factor);

  friend CoeffPoly operator+(CoeffPoly a, const CoeffPoly& b) { return a += b; }
  friend CoeffPoly operator-(CoeffPoly a, const CoeffPoly& b) { return a -= b; }
  friend CoeffPoly operator*(const CoeffPoly& a, const CoeffPoly& b);
  friend CoeffPoly operator*(CoeffPoly a, const Rational& b) { return a *= b; }
  friend CoeffPoly operator-(const CoeffPoly& a);
  friend bool operator==(const CoeffPoly& a, const CoeffPoly& b) { return a.terms_ == b.terms_; }

  // Exact substitution. Both dimensions must be nonzero when negative
  // exponents are present.
  Rational eval(const Rational& n, const Rational& N) const;
  Rational eval(long n, long N) const { return eval(Rational(n), Rational(N)); }

  // Keeps only the terms of total degree a + b == degree, i.e. the terms
  // that carry N^degree once n is rewritten as c N.
  CoeffPoly homogeneous_part(int degree) const;

 private:
  Terms terms_;
};

CoeffPoly negate(const CoeffPoly& x);
CoeffPoly scale(const CoeffPoly& x, const Rational& factor);

enum class RenderStyle { kRaw, kCSubstituted };
enum class RenderFormat { kPlain, kLatex };

// Raw style writes monomials in n and N ("1 + n*N^-1"). The c-substituted
// style rewrites n^a N^b as c^a N^(a+b) with c = n/N and groups terms by
// their power of N, e.g. "1+1/N^2", "2/(cN^2)", "1+3c+c^2+(5+5c)/N^2".
// Polynomials free of N stay in n, e.g. "2+1/n^2".
std::string render(const CoeffPoly& x, RenderStyle style = RenderStyle::kCSubstituted,
                   RenderFormat format = RenderFormat::kPlain);

// Reads any output of render() (both styles, both formats) back into the
// canonical polynomial. Throws std::invalid_argument with the offending
// position on malformed text, or when a division is not by a monomial.
CoeffPoly parse_coeff_poly(std::string_view text);

}  // namespace gaussmom
