#pragma once

#include <cstdint>
#include <random>

namespace bpo {

using Rng = std::mt19937_64;

// Named RNG streams. Every random draw in a run comes from a substream keyed
// by (seed, stream, index) so that stages and tasks stay independent of the
// order in which other stages consume randomness.
enum class Stream : std::uint64_t {
  kInit = 1,
  kPool = 2,
  kEvalSuite = 3,
  kMinerWarmup = 4,
  kMining = 5,
  kSftShuffle = 6,
  kRlTasks = 7,
  kRlRollouts = 8,
  kTest = 99,
};

inline Rng make_rng(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace bpo
