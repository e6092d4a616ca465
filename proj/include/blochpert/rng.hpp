#pragma once

// Counter-based pseudo-random streams. Every consumer derives its own
// substream from the master seed, so results are reproducible regardless
// of evaluation order or thread count. Doubles are produced directly from
// the 64-bit state (no std::distribution, whose output is
// implementation-defined).

#include <cmath>
#include <cstdint>

#include "blochpert/common.hpp"

namespace blochpert {

inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(mix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

  // Independent substream: same master seed + same id => same stream.
  Rng substream(uint64_t id) const { return Rng(mix64(state_ ^ mix64(id + 1))); }

  uint64_t next_u64() { return mix64(state_ + (++counter_) * 0x9e3779b97f4a7c15ULL); }

  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(kTwoPi * u2);
    have_spare_ = true;
    return r * std::cos(kTwoPi * u2);
  }

  // Uniform direction on the unit sphere in R^d.
  Vec sphere_dir(int d) {
    Vec u(d);
    double n2 = 0.0;
    do {
      for (int i = 0; i < d; ++i) u[i] = normal();
      n2 = u.squaredNorm();
    } while (n2 < 1e-12);
    return u / std::sqrt(n2);
  }

 private:
  uint64_t state_;
  uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace blochpert
