#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace efe {

/// Seeded random stream with platform-independent draws.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The std:: distributions are not, so the transforms below are
/// written out to keep CSV traces byte-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  /// Standard normal via Box-Muller; always consumes exactly two uniforms.
  double normal() {
    const double u1 = uniform_open();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Poisson draw by inversion; consumes exactly one uniform.
  std::int64_t poisson(double lambda) {
    const double u = uniform();
    return poisson_from_uniform(lambda, u);
  }

  static std::int64_t poisson_from_uniform(double lambda, double u) {
    if (lambda <= 0.0) return 0;
    // Start at k = 0 in log space so large lambda does not underflow.
    double log_p = -lambda;
    double cdf = std::exp(log_p);
    std::int64_t k = 0;
    const std::int64_t cap = static_cast<std::int64_t>(lambda + 40.0 * std::sqrt(lambda) + 100.0);
    while (cdf <= u && k < cap) {
      ++k;
      log_p += std::log(lambda) - std::log(static_cast<double>(k));
      cdf += std::exp(log_p);
    }
    return k;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace efe
