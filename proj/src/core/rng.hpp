#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace drdoo {

/// SplitMix64 finaliser: a bijective 64-bit mixing function.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// Child seed for stream `index` under `parent`. Used to split a master seed
/// into per-dataset seeds and a dataset seed into per-resample seeds.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
  return mix64(parent ^ mix64(index + 0x632BE59BD9B4E019ULL));
}

/// Counter-based SplitMix64 stream: the k-th output is
/// mix64(key + (k + 1) * golden_gamma). Streams are cheap to create, carry no
/// hidden state beyond (key, counter), and are identical on every platform.
/// Variates are produced by fixed transforms (no std::*_distribution) so
/// sampled datasets are bit-reproducible across standard libraries.
class CounterRng {
 public:
  static constexpr const char* kName = "splitmix64-counter";

  explicit constexpr CounterRng(std::uint64_t key, std::uint64_t counter = 0) noexcept
      : key_(key), counter_(counter) {}

  constexpr std::uint64_t next() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGoldenGamma);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_open_low() noexcept { return 1.0 - uniform(); }

  double exponential(double mean) noexcept { return -mean * std::log(uniform_open_low()); }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Standard normal by the Box-Muller cosine branch; consumes two words.
  double normal() noexcept {
    const double r = std::sqrt(-2.0 * std::log(uniform_open_low()));
    return r * std::cos(2.0 * std::numbers::pi * uniform());
  }

  /// Uniform integer in [0, bound) by rejection of the biased tail.
  std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % bound;
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace drdoo
