#pragma once

#include <cstdint>
#include <random>

namespace pokforge {

/// Seeded generator used by every stochastic operation.
///
/// The engine is the standard 64-bit Mersenne Twister (std::mt19937_64),
/// whose output sequence is fixed by the C++ standard. Derived quantities
/// are computed here rather than through <random> distributions so that the
/// streams are identical across standard library implementations:
///   uniform()    = (next() >> 11) * 2^-53
///   bernoulli(p) = uniform() < p
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform() < p;
  }

  /// Uniform integer in [0, bound) by rejection; bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % bound;
  }

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to derive independent sub-seeds
/// (per device, per cell, per read) from a parent seed.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) {
  return mix64(parent ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

}  // namespace pokforge
