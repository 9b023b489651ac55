#include "rng.hpp"

#include <cmath>

namespace tcpa {

uint64_t splitmix64_next(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

Rng::Rng(uint64_t seed) {
  uint64_t sm = seed;
  for (auto& s : s_) s = splitmix64_next(sm);
}

Rng Rng::stream(uint64_t seed, uint64_t stream_id) {
  uint64_t sm = seed;
  uint64_t base = splitmix64_next(sm);
  uint64_t mixed = base ^ (stream_id * 0xD1B54A32D192ED03ull);
  return Rng(mixed);
}

uint64_t Rng::next_u64() {
  const uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

double Rng::truncated_normal(double std_dev, double cutoff) {
  double z = gaussian();
  while (std::fabs(z) > cutoff) z = gaussian();
  return z * std_dev;
}

uint64_t Rng::below(uint64_t bound) {
  if (bound == 0) return 0;
  const uint64_t limit = ~uint64_t{0} - (~uint64_t{0} % bound);
  uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return x % bound;
}

void Rng::shuffle(std::vector<int>& values) {
  for (size_t i = values.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(below(i));
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace tcpa
