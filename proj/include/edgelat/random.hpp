#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace edgelat {

// Seeds are derived, never consumed sequentially across entities: every draw
// site hashes (root seed, entity key, purpose tag) so adding a device or an
// architecture does not shift the stream of any other.

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key,
                                           std::string_view tag) noexcept {
  return splitmix64(splitmix64(seed ^ 0x5851F42D4C957F2DULL) ^ splitmix64(key + 1) ^
                    fnv1a(tag));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view key,
                                 std::string_view tag) noexcept {
  return derive_seed(seed, fnv1a(key), tag);
}

// mt19937_64 output is fixed by the standard; the conversions below are kept
// local because the <random> distributions are implementation-defined and
// dataset files must not depend on which standard library built them.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }

  // Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = n * (UINT64_MAX / n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Mean-one lognormal multiplier with the given coefficient of variation.
  double lognormal_unit_mean(double cv) {
    if (cv <= 0.0) return 1.0;
    const double sigma2 = std::log1p(cv * cv);
    return std::exp(-0.5 * sigma2 + std::sqrt(sigma2) * normal());
  }

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      std::swap(first[i - 1], first[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace edgelat
