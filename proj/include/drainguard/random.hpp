#pragma once

#include <cstdint>
#include <random>

namespace drainguard {

enum class StreamId : std::uint64_t { perturbation = 1, exploration = 2 };

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seedable stream whose output is identical on every conforming platform:
// mt19937_64 is fully specified, and the mappings below avoid the
// implementation-defined std distributions.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, StreamId id)
      : engine_(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(id)))) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform on {0, ..., n-1} by rejection, n >= 1.
  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace drainguard
