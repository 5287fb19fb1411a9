#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace balab {

/**
 * Deterministic random source. The raw generator is std::mt19937_64 (a fixed
 * bit sequence per seed by the standard); the mappings to doubles are spelled
 * out here instead of using std::uniform_real_distribution /
 * std::normal_distribution, whose outputs are implementation-defined and
 * would break bit-identical reports across standard libraries.
 */
class DeterministicRng {
 public:
  explicit DeterministicRng(std::uint64_t seed) : gen_(seed) {}

  /** Uniform in [0,1) with 53 random mantissa bits. */
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /** Standard normal via Box-Muller; caches the second value of each pair. */
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  std::complex<double> cnormal() {
    double re = normal();
    double im = normal();
    return {re, im};
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace balab
