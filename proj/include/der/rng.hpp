// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace der {

// Deterministic random source for simulations. The engine is std::mt19937_64,
// whose output sequence is fixed by the standard; the distributions are
// defined here rather than taken from <random>, whose distribution output is
// implementation-specific. Same seed, same draw order, same stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0,1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1): centred on the half-ulp so 0 is never produced.
  double uniform_open01() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Unbiased integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

  // Box-Muller, cosine half only, so each call consumes exactly two draws.
  double normal(double mean, double sd) {
    const double u1 = uniform_open01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sd * r * std::cos(6.283185307179586 * u2);
  }

  // Rejection-sampled normal restricted to (lo, hi].
  double truncated_normal(double mean, double sd, double lo, double hi) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const double x = normal(mean, sd);
      if (x > lo && x <= hi) {
        return x;
      }
    }
    return 0.5 * (lo + hi);  // parameters put nearly all mass outside (lo,hi]
  }

  // Knuth's product-of-uniforms method; fine for small per-block rates.
  std::uint64_t poisson(double lambda) {
    const double threshold = std::exp(-lambda);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform01();
    } while (p > threshold);
    return k - 1;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace der
