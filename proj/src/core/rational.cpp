#include "core/rational.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "core/errors.hpp"

namespace sgbench {

namespace {

std::int64_t narrow(__int128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() ||
      v < std::numeric_limits<std::int64_t>::min()) {
    throw InvalidInput("rational overflow");
  }
  return static_cast<std::int64_t>(v);
}

Rational make_reduced(__int128 num, __int128 den) {
  if (den == 0) throw InvalidInput("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  __int128 a = num < 0 ? -num : num;
  __int128 b = den;
  while (b != 0) {
    const __int128 t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    num /= a;
    den /= a;
  }
  return Rational(narrow(num), narrow(den));
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw InvalidInput("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  num_ = g > 1 ? num / g : num;
  den_ = g > 1 ? den / g : den;
}

std::string Rational::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational operator+(const Rational& a, const Rational& b) {
  return make_reduced(static_cast<__int128>(a.num_) * b.den_ +
                          static_cast<__int128>(b.num_) * a.den_,
                      static_cast<__int128>(a.den_) * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

Rational operator*(const Rational& a, const Rational& b) {
  return make_reduced(static_cast<__int128>(a.num_) * b.num_,
                      static_cast<__int128>(a.den_) * b.den_);
}

Rational Rational::parse(std::string_view text) {
  if (text.empty()) throw InvalidInput("empty rational literal");
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const Rational n = parse(text.substr(0, slash));
    const Rational d = parse(text.substr(slash + 1));
    if (d.num() == 0) throw InvalidInput("rational with zero denominator");
    return n * Rational(d.den(), d.num());
  }
  std::size_t pos = 0;
  bool negative = false;
  if (text[pos] == '+' || text[pos] == '-') {
    negative = text[pos] == '-';
    ++pos;
  }
  __int128 mantissa = 0;
  int frac_digits = 0;
  bool seen_digit = false;
  bool in_fraction = false;
  for (; pos < text.size(); ++pos) {
    const char c = text[pos];
    if (c == '.') {
      if (in_fraction) throw InvalidInput("malformed number: " + std::string(text));
      in_fraction = true;
    } else if (c >= '0' && c <= '9') {
      seen_digit = true;
      mantissa = mantissa * 10 + (c - '0');
      if (in_fraction) ++frac_digits;
      if (mantissa > (static_cast<__int128>(1) << 100)) {
        throw InvalidInput("number has too many digits: " + std::string(text));
      }
    } else if (c == 'e' || c == 'E') {
      break;
    } else {
      throw InvalidInput("malformed number: " + std::string(text));
    }
  }
  if (!seen_digit) throw InvalidInput("malformed number: " + std::string(text));
  int exponent = -frac_digits;
  if (pos < text.size()) {
    const std::string exp_text(text.substr(pos + 1));
    std::size_t used = 0;
    int e = 0;
    try {
      e = std::stoi(exp_text, &used);
    } catch (const std::exception&) {
      throw InvalidInput("malformed exponent: " + std::string(text));
    }
    if (used != exp_text.size()) throw InvalidInput("malformed exponent: " + std::string(text));
    exponent += e;
  }
  if (exponent > 30 || exponent < -30) throw InvalidInput("exponent out of range: " + std::string(text));
  __int128 den = 1;
  for (; exponent > 0; --exponent) mantissa *= 10;
  for (; exponent < 0; ++exponent) den *= 10;
  return make_reduced(negative ? -mantissa : mantissa, den);
}

Rational Rational::from_double(double value) {
  if (!std::isfinite(value)) throw InvalidInput("non-finite value has no rational form");
  constexpr double scale = 1e9;
  const double scaled = std::round(value * scale);
  if (std::fabs(scaled) > 9e18) throw InvalidInput("value too large for rational conversion");
  return Rational(static_cast<std::int64_t>(scaled), static_cast<std::int64_t>(scale));
}

std::int64_t lcm_checked(std::int64_t a, std::int64_t b) {
  const std::int64_t g = std::gcd(a, b);
  return narrow(static_cast<__int128>(a / g) * b);
}

}  // namespace sgbench
