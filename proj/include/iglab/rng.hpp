#ifndef IGLAB_RNG_HPP
#define IGLAB_RNG_HPP

#include <cstdint>
#include <vector>

#include "iglab/numeric.hpp"

namespace iglab {

// Counter-based generator: the stream for replication r depends only on
// (seed, r), never on scheduling, so any worker layout reproduces the run.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Draw from a normalized probability vector by CDF scan.  The final slot
  // absorbs the rounding tail.
  int categorical(const std::vector<double>& probs) {
    const double u = uniform01();
    double acc = 0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline SplitMix64 stream_for(std::uint64_t seed, std::uint64_t index) {
  return SplitMix64(mix64(mix64(seed ^ 0x6A09E667F3BCC909ull) + (index + 1) * 0x9E3779B97F4A7C15ull));
}

}  // namespace iglab

#endif  // IGLAB_RNG_HPP
