#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace momo {

/// xoshiro256** 1.0 (Blackman & Vigna), seeded by expanding a 64-bit seed
/// with splitmix64. The output sequence is fixed, so seeds reproduce across
/// platforms; for seed 0 it starts
///   0x99ec5f36cb75f2b4, 0xbf6e1f784956452a, 0x1a5f849d4933e6e0, ...
/// Doubles use the top 53 bits; normals use Box-Muller without caching.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Advances by 2^128 steps; used to split independent streams.
  void jump();

  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n), n > 0 (Lemire rejection).
  std::uint64_t below(std::uint64_t n);
  /// Standard normal.
  double normal();

 private:
  std::array<std::uint64_t, 4> s_;
};

/// splitmix64 step, exposed for seed derivation.
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace momo
