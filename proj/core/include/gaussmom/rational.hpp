#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace gaussmom {

// Exact rationals. GMP keeps every value reduced with a positive denominator.
using Rational = mpq_class;
using BigInt = mpz_class;

// Parses "7", "-3/4" or a finite decimal such as "0.125" / "1e-3" exactly.
// Throws std::invalid_argument on malformed input.
Rational parse_rational(std::string_view text);

// "num/den", or just "num" when the denominator is one.
std::string to_string(const Rational& q);

Rational pow(const Rational& base, int exponent);

double to_double(const Rational& q);

}  // namespace gaussmom
