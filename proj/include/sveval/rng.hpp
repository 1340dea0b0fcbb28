#pragma once

// Seeded random streams. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; the variate transforms below are
// written out explicitly so results do not depend on the standard
// library's distribution implementations.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace sveval {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Hashes an ordered list of integers into one seed.
constexpr std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (std::uint64_t p : parts) h = mix64(h ^ mix64(p));
  return h;
}

/// Stage tags that separate the independent random streams of a replicate.
enum class Stage : std::uint64_t {
  population = 1,
  sampling = 2,
  splitting = 3,
  upsampling = 4,
  forest = 5,
};

class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Stream for (master seed, replicate, stage, sub-index).
  static Rng stream(std::uint64_t master, std::uint64_t replicate, Stage stage,
                    std::uint64_t sub = 0) {
    return Rng(derive_seed({master, replicate, static_cast<std::uint64_t>(stage), sub}));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Unbiased integer in [0, n); n must be positive (Lemire's method).
  std::uint64_t index(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t floor = (0 - n) % n;
      while (low < floor) {
        m = static_cast<unsigned __int128>(engine_()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sveval
