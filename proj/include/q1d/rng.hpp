#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "q1d/constants.hpp"

namespace q1d {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/**
 * Seed of the independent stream for one realization. Keyed by (master seed,
 * realization index) only, so any worker thread reproduces the same stream
 * and results do not depend on scheduling.
 */
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index + 1));
}

/**
 * Deterministic RNG. mt19937_64 output is pinned by the C++ standard and the
 * Box-Muller transform below is plain arithmetic, so draws are reproducible
 * bit for bit. std::normal_distribution et al. are implementation-defined
 * and deliberately not used.
 */
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log1p(-u1)); // log(1-u1); u1 < 1 always
    double c = std::cos(2.0 * constants::pi * u2);
    double s = std::sin(2.0 * constants::pi * u2);
    spare_ = r * s;
    have_spare_ = true;
    return r * c;
  }

  // Bernoulli(p) success count out of n trials (exact binomial).
  std::uint64_t binomial(std::uint64_t n, double p) {
    std::uint64_t k = 0;
    for (std::uint64_t i = 0; i < n; ++i)
      if (uniform() < p) ++k;
    return k;
  }

  std::uint64_t raw() { return eng_(); }

private:
  std::mt19937_64 eng_;
  double spare_ = 0;
  bool have_spare_ = false;
};

} // namespace q1d
