#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace enfuse {

/// SplitMix64 finalizer. Used for seed derivation only.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Child seed = hash(master, module name, scenario index).
///
/// Every stochastic component draws from a stream seeded this way, so
/// scenarios and particles never share a stream and adding threads cannot
/// change any draw.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view module,
                                    std::uint64_t index = 0) noexcept {
  return splitmix64(splitmix64(master ^ fnv1a(module)) + index);
}

/// Thin wrapper over mt19937_64 with distribution mappings that do not depend
/// on the standard library implementation (std::uniform_*_distribution is
/// implementation-defined, which would break byte-identical outputs across
/// toolchains).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Rejection sampling, unbiased. n must be > 0.
  std::uint64_t index(std::uint64_t n) noexcept {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r = engine_();
    while (r >= limit) r = engine_();
    return r % n;
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Standard normal via Box-Muller (one value per call, no caching).
  double normal() noexcept;

  std::uint64_t next() noexcept { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

template <typename Container>
void shuffle(Container& c, Rng& rng) {
  for (std::size_t i = c.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.index(i));
    using std::swap;
    swap(c[i - 1], c[j]);
  }
}

}  // namespace enfuse
