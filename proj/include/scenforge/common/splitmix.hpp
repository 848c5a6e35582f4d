#pragma once

#include <cstdint>

namespace scenforge {

// SplitMix64 (Steele, Lea & Flood). The constants are part of the sampling
// contract: any port must reproduce the same sequence bit for bit.
constexpr std::uint64_t kSplitMixGamma = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kSplitMixMul1 = 0xBF58476D1CE4E5B9ULL;
constexpr std::uint64_t kSplitMixMul2 = 0x94D049BB133111EBULL;

class SplitMix64 {
 public:
  constexpr explicit SplitMix64(std::uint64_t state) : state_(state) {}

  constexpr std::uint64_t next() {
    state_ += kSplitMixGamma;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * kSplitMixMul1;
    z = (z ^ (z >> 27)) * kSplitMixMul2;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  constexpr double next_unit() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

/// Finalizer-only mix of one word; used to derive independent stream seeds.
constexpr std::uint64_t splitmix_mix(std::uint64_t x) {
  return SplitMix64(x).next();
}

}  // namespace scenforge
