#pragma once

#include <cstdint>

namespace fourmoment {

/// SplitMix64: the project-wide 64-bit generator (Steele/Lea/Vigna finalizer over
/// a Weyl counter). Chosen because the state is a plain counter, which makes
/// stream splitting trivial and every draw a pure function of (seed, index).
///
/// Stream-splitting convention used everywhere: replicate r of a run with base
/// seed s draws from SplitMix64(s + r), wrapping arithmetic. Two replicates of
/// the same run therefore never share a stream, and a (seed, n, reps) triple
/// identifies the full random input of an estimate bit-for-bit.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in [a, b).
  double uniform(double a, double b) noexcept { return a + (b - a) * uniform01(); }

  /// One random bit.
  int bit() noexcept { return static_cast<int>(next() >> 63); }

 private:
  std::uint64_t state_;
};

/// Seed for replicate `r` of a run with the given base seed.
inline std::uint64_t replicate_seed(std::uint64_t base, std::uint64_t r) noexcept {
  return base + r;  // wrapping add; SplitMix64 decorrelates adjacent seeds
}

}  // namespace fourmoment
