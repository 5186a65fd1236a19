#pragma once

#include <cstdint>

namespace pvc {

// Counter-based uniform generator: (seed, index) -> draw, no shared state.
// Two finalizer rounds of splitmix64 over the keyed counter.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  // Uniform draw in the open interval (0,1), determined by (seed, index).
  double uniform(std::uint64_t index) const {
    std::uint64_t z = mix64(mix64(seed_ ^ 0x6a09e667f3bcc909ULL) + index);
    z = mix64(z ^ (seed_ >> 1));
    // 53-bit mantissa, shifted off 0 and 1.
    double u = static_cast<double>(z >> 11) * 0x1.0p-53;
    if (u <= 0.0) u = 0x1.0p-53;
    if (u >= 1.0) u = 1.0 - 0x1.0p-53;
    return u;
  }

  // Derive an independent stream, e.g. one per replication.
  CounterRng substream(std::uint64_t key) const {
    return CounterRng(mix64(seed_ ^ mix64(key + 0x2545f4914f6cdd1dULL)));
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

}  // namespace pvc
