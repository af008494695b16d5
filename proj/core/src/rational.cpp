#include "gaussmom/rational.hpp"

#include <cctype>
#include <stdexcept>

namespace gaussmom {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char ch : s) {
    if (!std::isdigit(static_cast<unsigned char>(ch))) return false;
  }
  return true;
}

BigInt ten_pow(unsigned long e) {
  BigInt r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, e);
  return r;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.empty()) throw std::invalid_argument("empty rational literal");

  bool negative = false;
  if (s.front() == '+' || s.front() == '-') {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }

  Rational value;
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    auto num = s.substr(0, slash);
    auto den = s.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) {
      throw std::invalid_argument("malformed rational literal '" + std::string(text) + "'");
    }
    BigInt d(std::string(den), 10);
    if (d == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    value = Rational(BigInt(std::string(num), 10), d);
    value.canonicalize();
  } else {
    long exponent = 0;
    if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
      auto exp_part = s.substr(e + 1);
      s = s.substr(0, e);
      bool exp_negative = false;
      if (!exp_part.empty() && (exp_part.front() == '+' || exp_part.front() == '-')) {
        exp_negative = exp_part.front() == '-';
        exp_part.remove_prefix(1);
      }
      if (!all_digits(exp_part) || exp_part.size() > 6) {
        throw std::invalid_argument("malformed exponent in '" + std::string(text) + "'");
      }
      exponent = std::stol(std::string(exp_part));
      if (exp_negative) exponent = -exponent;
    }
    std::string digits;
    long scale = 0;
    if (auto dot = s.find('.'); dot != std::string_view::npos) {
      auto int_part = s.substr(0, dot);
      auto frac_part = s.substr(dot + 1);
      if ((!int_part.empty() && !all_digits(int_part)) || (!frac_part.empty() && !all_digits(frac_part)) ||
          (int_part.empty() && frac_part.empty())) {
        throw std::invalid_argument("malformed decimal literal '" + std::string(text) + "'");
      }
      digits = std::string(int_part) + std::string(frac_part);
      scale = static_cast<long>(frac_part.size());
    } else {
      if (!all_digits(s)) throw std::invalid_argument("malformed number '" + std::string(text) + "'");
      digits = std::string(s);
    }
    if (digits.empty()) digits = "0";
    BigInt mantissa(digits, 10);
    long net = exponent - scale;
    if (net >= 0) {
      value = Rational(mantissa * ten_pow(static_cast<unsigned long>(net)));
    } else {
      value = Rational(mantissa, ten_pow(static_cast<unsigned long>(-net)));
      value.canonicalize();
    }
  }
  return negative ? Rational(-value) : value;
}

std::string to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Rational pow(const Rational& base, int exponent) {
  if (exponent < 0) {
    if (base == 0) throw std::domain_error("zero raised to a negative power");
    Rational inv = 1 / base;
    return pow(inv, -exponent);
  }
  Rational result = 1;
  BigInt num, den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), static_cast<unsigned long>(exponent));
  mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), static_cast<unsigned long>(exponent));
  result = Rational(num, den);
  result.canonicalize();
  return result;
}

double to_double(const Rational& q) { return q.get_d(); }

}  // namespace gaussmom
