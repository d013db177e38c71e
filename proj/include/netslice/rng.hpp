#pragma once

#include <cmath>
#include <cstdint>

// Deterministic seeded randomness. Every stochastic component derives its
// draws from (master seed, stream tag, indices), so a draw for a given
// (cell, slice, step) is the same regardless of evaluation order. This is
// what makes paired-seed scheme comparisons and parallel cell evaluation
// reproducible.

namespace netslice {

enum class Stream : std::uint64_t {
  users = 1,
  cqi_walk = 2,
  cqi_init = 3,
  mask = 4,
  explore = 5,
  solver_noise = 6,
  split = 7,
  augment = 8,
  estimator_init = 9,
  estimator_shuffle = 10,
  sim = 11,
};

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive(std::uint64_t seed, Stream stream, std::uint64_t a = 0,
                            std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = mix64(seed ^ 0xd1b54a32d192ed03ULL);
  s = mix64(s ^ static_cast<std::uint64_t>(stream));
  s = mix64(s ^ a);
  s = mix64(s ^ b);
  s = mix64(s ^ c);
  return s;
}

// splitmix64 generator; cheap and plenty for simulation-scale draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_ - 0x9e3779b97f4a7c15ULL);
  }

  // uniform in [0, 1)
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller without a cached spare, so the draw count per call is fixed.
  double normal(double mean = 0.0, double stddev = 1.0) {
    double u1 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Knuth's product method; fine for the per-slice user counts used here.
  long poisson(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    long k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform01();
    } while (p > limit);
    return k - 1;
  }

  // uniform integer in [lo, hi]
  long uniform_int(long lo, long hi) {
    return lo + static_cast<long>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::uint64_t state_;
};

}  // namespace netslice
