#pragma once

#include <cstdint>

namespace explb {

// SplitMix64 (Vigna, 2015). The whole state is one 64-bit word, the update is
// four lines, and the output for a given seed is identical on every platform,
// which is all a reproducible Monte Carlo harness needs. Reference outputs
// for seeds 0 / 42 / 0x123456789abcdef0 are frozen in tests/test_core.cpp.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : state_(seed) {}

  // Advances the state by exactly one step.
  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform double in [0,1) on the 2^53 grid; consumes one step.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in {0, ..., n-1}; consumes one step.
  int next_below(int n) {
    const int k = static_cast<int>(next_unit() * n);
    return k < n ? k : n - 1;
  }

 private:
  std::uint64_t state_;
};

// Replicate r of a Monte Carlo run draws from stream seed ^ r, so replicates
// can execute in any order (or in parallel) without changing their draws.
inline RandomStream replicate_stream(std::uint64_t seed, std::uint64_t replicate) {
  return RandomStream(seed ^ replicate);
}

}  // namespace explb
