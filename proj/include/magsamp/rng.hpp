#pragma once

// Counter-based generator: draw k of stream `seed` is
//
//   z  = seed + (k + 1) * 0x9E3779B97F4A7C15          (mod 2^64)
//   z  = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z  = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   out = z ^ (z >> 31)
//
// i.e. the SplitMix64 output function applied to a Weyl sequence. Uniform
// doubles take the top 53 bits: (out >> 11) * 2^-53, in [0, 1). Any draw can
// be computed directly from (seed, k), so shards of a plan can be produced
// independently and the results match any other implementation of the same
// recipe.

#include <cstdint>

namespace magsamp {

class CounterRng {
 public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  explicit CounterRng(std::uint64_t seed, std::uint64_t counter = 0) : seed_(seed), counter_(counter) {}

  static std::uint64_t mix(std::uint64_t seed, std::uint64_t k) {
    std::uint64_t z = seed + (k + 1) * kGolden;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

  std::uint64_t next_u64() { return mix(seed_, counter_++); }
  double next_unit() { return to_unit(next_u64()); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }
  void seek(std::uint64_t counter) { counter_ = counter; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

}  // namespace magsamp
