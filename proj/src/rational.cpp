#include "latticeborell/rational.hpp"

#include <cmath>

#include "latticeborell/error.hpp"

namespace latticeborell {

namespace {

Integer parse_integer(std::string_view digits, std::string_view whole) {
  if (digits.empty()) throw Error(ErrorKind::ParseError, "empty number in '" + std::string(whole) + "'");
  for (char c : digits) {
    if (c < '0' || c > '9') throw Error(ErrorKind::ParseError, "bad digit in '" + std::string(whole) + "'");
  }
  // GMP would read a leading 0 as an octal prefix.
  const auto first = digits.find_first_not_of('0');
  return first == std::string_view::npos ? Integer(0) : Integer(std::string(digits.substr(first)));
}

Rational parse_decimal(std::string_view text) {
  bool negative = false;
  std::string_view body = text;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  Integer exponent_shift = 0;
  if (auto e = body.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp_text = body.substr(e + 1);
    bool exp_negative = false;
    if (!exp_text.empty() && (exp_text.front() == '-' || exp_text.front() == '+')) {
      exp_negative = exp_text.front() == '-';
      exp_text.remove_prefix(1);
    }
    exponent_shift = parse_integer(exp_text, text);
    if (exp_negative) exponent_shift = -exponent_shift;
    body = body.substr(0, e);
  }
  std::string_view int_part = body;
  std::string_view frac_part;
  if (auto dot = body.find('.'); dot != std::string_view::npos) {
    int_part = body.substr(0, dot);
    frac_part = body.substr(dot + 1);
  }
  if (int_part.empty() && frac_part.empty()) throw Error(ErrorKind::ParseError, "bad number '" + std::string(text) + "'");
  std::string digits = std::string(int_part) + std::string(frac_part);
  Rational value(parse_integer(digits, text));
  long shift = static_cast<long>(exponent_shift) - static_cast<long>(frac_part.size());
  Rational ten(10);
  if (shift > 0) value *= pow(ten, static_cast<unsigned>(shift));
  if (shift < 0) value /= pow(ten, static_cast<unsigned>(-shift));
  return negative ? Rational(-value) : value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational num = parse_decimal(text.substr(0, slash));
    Rational den = parse_decimal(text.substr(slash + 1));
    if (den == 0) throw Error(ErrorKind::ParseError, "zero denominator in '" + std::string(text) + "'");
    return num / den;
  }
  return parse_decimal(text);
}

Rational rational_from_double(double value) {
  if (!std::isfinite(value)) throw Error(ErrorKind::InvalidArgument, "non-finite value");
  int exponent = 0;
  double mantissa = std::frexp(value, &exponent);
  // 53-bit mantissa scaled to an integer.
  auto scaled = static_cast<std::int64_t>(std::ldexp(mantissa, 53));
  exponent -= 53;
  Rational result{Integer(scaled)};
  if (exponent > 0) result *= pow(Rational(2), static_cast<unsigned>(exponent));
  if (exponent < 0) result /= pow(Rational(2), static_cast<unsigned>(-exponent));
  return result;
}

double to_double(const Rational& value) { return value.convert_to<double>(); }

std::string to_string(const Rational& value) {
  if (denominator(value) == 1) return numerator(value).str();
  return numerator(value).str() + "/" + denominator(value).str();
}

Rational pow(const Rational& base, unsigned exponent) {
  Rational result(1);
  Rational factor = base;
  while (exponent > 0) {
    if (exponent & 1U) result *= factor;
    exponent >>= 1U;
    if (exponent > 0) factor *= factor;
  }
  return result;
}

std::int64_t floor_int(const Rational& value) {
  Integer q = numerator(value) / denominator(value);  // truncates toward zero
  if (value < 0 && Rational(q) != value) q -= 1;
  return q.convert_to<std::int64_t>();
}

std::int64_t ceil_int(const Rational& value) { return -floor_int(-value); }

bool is_small_integer(double value, std::int64_t limit) {
  return value >= 0 && value <= static_cast<double>(limit) && std::floor(value) == value;
}

}  // namespace latticeborell
