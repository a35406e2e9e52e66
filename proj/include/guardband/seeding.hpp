#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>
#include <vector>

// Seed derivation and reproducible sampling. Every random quantity in the
// project flows from one master seed through derive_seed(), and all
// distributions are built from the raw mt19937_64 output stream so that a
// given seed produces the same bytes on every standard-conforming
// implementation (std::normal_distribution et al. are not pinned by the
// standard and are deliberately avoided).

namespace guardband {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// splitmix64 finalizer; bijective 64-bit mix.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

/// FNV-1a over a byte string, used to turn stream labels into seeds.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Independent sub-seed for numbered stream `stream` of `base`.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return mix64(base + (stream + 1) * kGoldenGamma);
}

/// Independent sub-seed for a named stream of `base`.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view label) {
  return mix64(base ^ fnv1a64(label));
}

/// Deterministic random source: mt19937_64 engine plus hand-rolled
/// distributions (uniform in [0,1) from the top 53 bits, Box-Muller
/// gaussian, rejection-sampled bounded integers).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// N(mean, sigma) via Box-Muller; two fresh uniforms per call.
  double gaussian(double mean, double sigma) {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sigma * r * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform integer in [0, n), unbiased by rejection.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
};

/// In-place Fisher-Yates shuffle driven by `rng`.
template <typename T>
void fisher_yates(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.bounded(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace guardband
