#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/gmp.hpp>

namespace latticeborell {

using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

/// 100 decimal digits; used where a comparison involves p-th roots and cannot
/// be carried out in Rational.
using HighFloat = boost::multiprecision::cpp_bin_float_100;

/// Parses "p/q", "p", or a decimal literal such as "0.25" exactly.
Rational parse_rational(std::string_view text);

/// Exact value of a binary64 (every finite double is a dyadic rational).
Rational rational_from_double(double value);

double to_double(const Rational& value);

/// Canonical "p/q" (or "p" when the denominator is 1).
std::string to_string(const Rational& value);

Rational pow(const Rational& base, unsigned exponent);

/// floor/ceil of a rational as a 64-bit integer.
std::int64_t floor_int(const Rational& value);
std::int64_t ceil_int(const Rational& value);

/// True when `value` is a nonnegative integer small enough for exact paths.
bool is_small_integer(double value, std::int64_t limit = 1'000'000);

}  // namespace latticeborell
