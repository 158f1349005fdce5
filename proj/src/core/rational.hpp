#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace sgbench {

// Exact rational with a positive denominator, always kept in lowest terms.
// Energies, couplings and thresholds are compared through this type so that
// an energy exactly on a threshold is never misclassified by rounding.
class Rational {
public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }

  double to_double() const noexcept {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }
  std::string to_string() const;

  Rational abs() const noexcept { return {num_ < 0 ? -num_ : num_, den_, Raw{}}; }

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a) { return {-a.num_, a.den_, Raw{}}; }

  friend bool operator==(const Rational& a, const Rational& b) noexcept {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept {
    const __int128 lhs = static_cast<__int128>(a.num_) * b.den_;
    const __int128 rhs = static_cast<__int128>(b.num_) * a.den_;
    return lhs <=> rhs;
  }

  // Parses "3", "-0.125", "1e-2" style decimals and "a/b" fractions exactly.
  static Rational parse(std::string_view text);

  // Nearest rational with denominator dividing 10^9; exact for any decimal
  // literal with at most nine fractional digits.
  static Rational from_double(double value);

private:
  struct Raw {};
  constexpr Rational(std::int64_t num, std::int64_t den, Raw) : num_(num), den_(den) {}

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

std::int64_t lcm_checked(std::int64_t a, std::int64_t b);

}  // namespace sgbench
