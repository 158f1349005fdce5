#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace sgbench {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based key derivation: the value depends only on the words, never
// on call order, so streams for (seed, instance, replica, ...) are stable
// under reordering and parallel execution.
inline std::uint64_t derive_key(std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (const std::uint64_t w : words) h = mix64(h ^ mix64(w));
  return h;
}

// Uniform integer in [0, n) drawn from the counter stream keyed by `key`;
// rejection sampling keeps the draw exactly uniform.
inline std::uint64_t counter_uniform_index(std::uint64_t key, std::uint64_t n) noexcept {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  for (std::uint64_t ctr = 0;; ++ctr) {
    const std::uint64_t x = mix64(key + ctr * 0xd1b54a32d192ed03ULL);
    if (x < limit) return x % n;
  }
}

// Sequential generator used inside solvers. The conversions below are written
// out explicitly so streams are identical across standard libraries.
class Rng {
public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t limit = max() - (max() % n);
    for (;;) {
      const std::uint64_t x = engine_();
      if (x < limit) return x % n;
    }
  }

  int spin() { return (engine_() >> 63) ? 1 : -1; }

private:
  std::mt19937_64 engine_;
};

}  // namespace sgbench
