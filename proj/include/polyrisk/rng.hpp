#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "polyrisk/types.hpp"

namespace polyrisk {

/// Seedable RNG with portable transforms. std::mt19937_64 output is
/// specified bit-exactly by the standard; the distribution transforms here
/// are hand-rolled because the std::*_distribution classes are
/// implementation-defined and would break cross-platform reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  /// Derive an independent stream, e.g. per restart or per fold.
  Rng derive(std::uint64_t stream) const { return Rng(seed_mix(seed_, stream)); }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  Real uniform() { return static_cast<Real>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi).
  Real uniform(Real lo, Real hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound), bound > 0, exactly uniform via rejection.
  std::uint64_t uniform_int(std::uint64_t bound) {
    std::uint64_t threshold = (-bound) % bound;
    for (;;) {
      std::uint64_t r = engine_();
      if (r >= threshold) return r % bound;
    }
  }

  bool bernoulli(Real p) { return uniform() < p; }

  /// Standard normal via Box-Muller (no cached spare).
  Real normal() {
    Real u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    Real u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  static std::uint64_t seed_mix(std::uint64_t a, std::uint64_t b) {
    // splitmix64 finalizer over the pair
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace polyrisk
