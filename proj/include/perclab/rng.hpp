#pragma once

#include <cstdint>

namespace perclab {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Child seed for a named sub-experiment (scale, direction, ...).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
  return mix64(mix64(master + kGoldenGamma) ^ mix64(tag * kGoldenGamma + 0x632BE59BD9B4E019ULL));
}

/// Counter-based random stream for one replicate. draw(c) depends only on
/// (master seed, replicate, c), so edges can be sampled lazily in any order
/// and every worker count sees the same configuration.
class ReplicateStream {
 public:
  constexpr ReplicateStream(std::uint64_t master_seed, std::uint64_t replicate)
      : key_(mix64(mix64(master_seed) ^ (replicate * 0xD1B54A32D192ED03ULL + kGoldenGamma))) {}

  constexpr std::uint64_t draw(std::uint64_t counter) const {
    return mix64(key_ + (counter + 1) * kGoldenGamma);
  }
  double uniform(std::uint64_t counter) const { return double(draw(counter) >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t key_;
};

}  // namespace perclab
