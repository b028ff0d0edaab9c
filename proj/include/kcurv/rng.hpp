#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace kcurv {

/// Seeded RNG with hand-rolled distributions so that streams are identical
/// across platforms and standard-library versions (the standard does not pin
/// uniform_real_distribution's algorithm).
struct Rng {
  std::mt19937_64 gen;

  explicit Rng(std::uint64_t seed) : gen(seed) {}

  /// uniform in [0, 1)
  double uniform() {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
  }

  /// uniform in [a, b)
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// standard normal via Box-Muller (uses two draws, no caching: keeps the
  /// stream position a pure function of call count)
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }
};

}  // namespace kcurv
