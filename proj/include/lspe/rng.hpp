#pragma once

#include <cstdint>
#include <random>

namespace lspe {

// One SplitMix64 step.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Stream seed for sub-stream `index` under `master`. Sub-streams are
/// disjoint regardless of the order trajectories are scheduled in, so
/// parallel ensembles reproduce the serial results bit for bit.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = master ^ 0x6A09E667F3BCC908ull;
  std::uint64_t a = splitmix64_next(s);
  s ^= index * 0xD1342543DE82EF95ull + 0x2545F4914F6CDD1Dull;
  std::uint64_t b = splitmix64_next(s);
  return a ^ (b + 0x9E3779B97F4A7C15ull + (a << 6) + (a >> 2));
}

/// mt19937_64 mapped to doubles in [0,1) with 53 random bits. The output
/// sequence for a given seed is pinned by the standard, so paths are
/// reproducible across platforms.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}

  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lspe
