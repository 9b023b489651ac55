#pragma once

#include <cstdint>
#include <vector>

namespace tcpa {

// splitmix64 step; mixes the state and returns the next output.
uint64_t splitmix64_next(uint64_t& state);

// xoshiro256** seeded through splitmix64. Every determinism guarantee in the
// engine (dataset generation, parameter init, batch shuffles) is pinned to
// this generator rather than to a platform RNG.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  // Independent deterministic stream for a (seed, stream) pair, used so that
  // e.g. per-epoch shuffles do not consume draws from the init stream.
  static Rng stream(uint64_t seed, uint64_t stream_id);

  uint64_t next_u64();

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform01();

  // Uniform in [lo, hi).
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller with a cached spare.
  double gaussian();

  // Normal(0, std_dev^2) re-drawn until |z| <= cutoff standard deviations.
  double truncated_normal(double std_dev, double cutoff = 2.0);

  // Unbiased integer in [0, bound) via rejection.
  uint64_t below(uint64_t bound);

  // In-place Fisher-Yates shuffle.
  void shuffle(std::vector<int>& values);

 private:
  uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace tcpa
