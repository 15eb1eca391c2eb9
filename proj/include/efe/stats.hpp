#pragma once

// Closed-form probabilistic primitives shared across the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "efe/error.hpp"

namespace efe::stats {

inline constexpr double kSqrt2 = std::numbers::sqrt2;
inline constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;  // 1/sqrt(2 pi)
inline constexpr double kSqrt2OverPi = 0.7978845608028653558798921;  // sqrt(2/pi)

struct GaussianParams {
  double mean = 0.0;
  double std = 1.0;

  GaussianParams() = default;
  GaussianParams(double m, double s) : mean(m), std(s) {
    require(s > 0.0 && std::isfinite(s) && std::isfinite(m), Errc::InvalidArgument,
            "GaussianParams requires finite mean and std > 0");
  }
};

inline double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

/// Standard normal CDF through erfc, which keeps full relative precision in
/// the lower tail.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

/// log Phi(z), stable for very negative z.
inline double log_normal_cdf(double z) {
  if (z > -20.0) return std::log(normal_cdf(z));
  // Asymptotic series: Phi(z) ~ phi(z)/(-z) * (1 - 1/z^2 + 3/z^4 - 15/z^6)
  const double z2 = z * z;
  const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return -0.5 * z2 - std::log(-z) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

/// phi(z) / Phi(z) (inverse Mills ratio), stable for very negative z.
inline double normal_hazard(double z) {
  if (z > -20.0) return normal_pdf(z) / normal_cdf(z);
  const double z2 = z * z;
  const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return -z / series;
}

/// E|y - c| for y ~ N(mean, std^2):
///   (mean - c) [1 - 2 Phi((c - mean)/std)] + std sqrt(2/pi) exp(-(c - mean)^2 / (2 std^2)).
inline double shifted_abs_expectation(const GaussianParams& g, double c) {
  const double a = (c - g.mean) / g.std;
  return (g.mean - c) * (1.0 - 2.0 * normal_cdf(a)) + g.std * kSqrt2OverPi * std::exp(-0.5 * a * a);
}

/// Gauss-Hermite rule for weight exp(-u^2).
template <std::size_t N>
struct HermiteRule {
  std::array<double, N> nodes{};
  std::array<double, N> weights{};
};

namespace detail {

// Newton iteration on the orthonormal Hermite recurrence with the usual
// asymptotic initial guesses for the largest roots.
template <std::size_t N>
HermiteRule<N> build_hermite_rule() {
  HermiteRule<N> rule;
  constexpr int n = static_cast<int>(N);
  const double pim4 = 0.7511255444649425;  // pi^{-1/4}
  double z = 0.0;
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * rule.nodes[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * rule.nodes[1];
    } else {
      z = 2.0 * z - rule.nodes[static_cast<std::size_t>(i - 2)];
    }
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = pim4;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    rule.nodes[static_cast<std::size_t>(i)] = z;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = -z;
    rule.weights[static_cast<std::size_t>(i)] = 2.0 / (pp * pp);
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = 2.0 / (pp * pp);
  }
  return rule;
}

}  // namespace detail

inline constexpr std::size_t kHermiteNodes = 64;

inline const HermiteRule<kHermiteNodes>& hermite_rule() {
  static const HermiteRule<kHermiteNodes> rule = detail::build_hermite_rule<kHermiteNodes>();
  return rule;
}

/// E[f(y)] for y ~ N(g.mean, g.std^2) by 64-node Gauss-Hermite quadrature
/// with y = mean + sqrt(2) std u.
template <class F>
double gaussian_expectation(const GaussianParams& g, F&& f) {
  const auto& rule = hermite_rule();
  double acc = 0.0;
  for (std::size_t i = 0; i < kHermiteNodes; ++i) {
    const double y = g.mean + kSqrt2 * g.std * rule.nodes[i];
    const double v = f(y);
    if (!std::isfinite(v)) {
      throw Error(Errc::NonFiniteIntegrand, "integrand not finite at y = " + std::to_string(y));
    }
    acc += rule.weights[i] * v;
  }
  return acc / std::sqrt(std::numbers::pi);
}

// ---------------------------------------------------------------------------
// Poisson

inline double log_factorial(std::int64_t k) { return std::lgamma(static_cast<double>(k) + 1.0); }

inline double poisson_log_pmf(std::int64_t k, double lambda) {
  if (k < 0) return -INFINITY;
  if (lambda <= 0.0) return k == 0 ? 0.0 : -INFINITY;
  return static_cast<double>(k) * std::log(lambda) - lambda - log_factorial(k);
}

/// Contiguous outcome window [first, first + pmf.size()) holding at least
/// 1 - tail_mass of a Poisson distribution.
struct PoissonWindow {
  std::int64_t first = 0;
  std::vector<double> pmf;

  std::int64_t last() const { return first + static_cast<std::int64_t>(pmf.size()) - 1; }
  double mass() const {
    double s = 0.0;
    for (double p : pmf) s += p;
    return s;
  }
};

/// Grows the window outward from the mode, always toward the heavier
/// neighbour, until the retained mass reaches 1 - tail_mass.
inline PoissonWindow poisson_window(double lambda, double tail_mass = 1e-10) {
  PoissonWindow w;
  if (lambda <= 0.0) {
    w.first = 0;
    w.pmf = {1.0};
    return w;
  }
  const auto mode = static_cast<std::int64_t>(std::floor(lambda));
  std::vector<double> up{std::exp(poisson_log_pmf(mode, lambda))};
  std::vector<double> down;  // pmf at mode-1, mode-2, ...
  double total = up.front();
  std::int64_t lo = mode;
  std::int64_t hi = mode;
  while (total < 1.0 - tail_mass) {
    const double next_hi = up.back() * lambda / static_cast<double>(hi + 1);
    const double next_lo =
        lo > 0 ? (down.empty() ? up.front() : down.back()) * static_cast<double>(lo) / lambda : -1.0;
    if (next_lo > next_hi) {
      down.push_back(next_lo);
      total += next_lo;
      --lo;
    } else {
      if (next_hi <= 0.0 && lo == 0) break;  // nothing left to add
      up.push_back(next_hi);
      total += next_hi;
      ++hi;
    }
  }
  w.first = lo;
  w.pmf.reserve(down.size() + up.size());
  for (auto it = down.rbegin(); it != down.rend(); ++it) w.pmf.push_back(*it);
  for (double p : up) w.pmf.push_back(p);
  return w;
}

/// P(Y > k) for Y ~ Poisson(lambda), by direct summation of the pmf in
/// log-factorial form.
inline double poisson_upper_tail(double lambda, double k) {
  if (lambda <= 0.0) return k < 0.0 ? 1.0 : 0.0;
  if (k < 0.0) return 1.0;
  const auto kk = static_cast<std::int64_t>(std::floor(k));
  if (static_cast<double>(kk) < lambda) {
    double lower = 0.0;
    for (std::int64_t y = 0; y <= kk; ++y) lower += std::exp(poisson_log_pmf(y, lambda));
    return std::max(0.0, 1.0 - lower);
  }
  double upper = 0.0;
  for (std::int64_t y = kk + 1;; ++y) {
    const double p = std::exp(poisson_log_pmf(y, lambda));
    upper += p;
    if (p < 1e-18 * std::max(upper, 1e-300) || p == 0.0) break;
  }
  return upper;
}

inline double binary_entropy(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (p < 1.0) h -= (1.0 - p) * std::log1p(-p);
  return h;
}

}  // namespace efe::stats
