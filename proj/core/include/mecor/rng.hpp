#pragma once

#include <array>
#include <cstdint>

#include "mecor/stats_core.hpp"

namespace mecor {

/// Deterministic, platform-independent random stream (xoshiro256++ state
/// seeded through SplitMix64). Substreams are keyed by (seed, replicate,
/// tag) so that replicate results are independent of thread scheduling and
/// scenarios differing only in the error model share true endpoints.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : RngStream(seed, 0, 0) {}

  RngStream(std::uint64_t seed, std::uint64_t replicate, std::uint64_t tag) {
    std::uint64_t key = splitmix(seed);
    key = splitmix(key ^ (replicate * 0xA24BAED4963EE407ULL));
    key = splitmix(key ^ (tag * 0x9FB21C651E98DF25ULL));
    for (auto& word : state_) {
      key += 0x9E3779B97F4A7C15ULL;
      word = mix(key);
    }
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform draw strictly inside (0, 1).
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via the inverse CDF, so draws are reproducible across
  /// standard libraries and platforms.
  double next_normal() { return normal_quantile(next_uniform()); }

  double next_normal(double mean, double sd) { return mean + sd * next_normal(); }

  /// Unbiased uniform index in [0, n).
  std::size_t next_index(std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return static_cast<std::size_t>(r % bound);
    }
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t splitmix(std::uint64_t x) {
    return mix(x + 0x9E3779B97F4A7C15ULL);
  }

  std::array<std::uint64_t, 4> state_{};
};

}  // namespace mecor
