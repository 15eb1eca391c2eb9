#pragma once

// One-dimensional bandit on a uniform grid over [0, 1].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "efe/error.hpp"
#include "efe/rng.hpp"

namespace efe::env {

struct BanditSpec {
  std::size_t n_grid = 200;
  double noise_sd = 0.05;

  static double f(double x) {
    constexpr double pi = std::numbers::pi;
    return 0.6 * std::sin(3.0 * pi * x) + 0.4 * std::cos(5.0 * pi * x) + 0.2 * x;
  }

  double grid_point(std::size_t i) const { return static_cast<double>(i) / static_cast<double>(n_grid - 1); }

  std::vector<double> grid() const {
    std::vector<double> g(n_grid);
    for (std::size_t i = 0; i < n_grid; ++i) g[i] = grid_point(i);
    return g;
  }

  /// Best noiseless value on the grid.
  double y_star() const {
    double best = f(grid_point(0));
    for (std::size_t i = 1; i < n_grid; ++i) best = std::max(best, f(grid_point(i)));
    return best;
  }

  std::size_t argmax() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n_grid; ++i) {
      if (f(grid_point(i)) > f(grid_point(best))) best = i;
    }
    return best;
  }

  /// Index of the grid point equal to x (within 1e-12).
  std::size_t grid_index(double x) const {
    const double pos = x * static_cast<double>(n_grid - 1);
    const double r = std::round(pos);
    if (!(x >= -1e-12 && x <= 1.0 + 1e-12) || std::abs(pos - r) > 1e-12 * static_cast<double>(n_grid)) {
      throw Error(Errc::OffGridQuery, "x = " + std::to_string(x) + " is not a grid point");
    }
    return static_cast<std::size_t>(r);
  }
};

inline double bandit_observe(const BanditSpec& spec, double x, Rng& rng) {
  spec.grid_index(x);
  return BanditSpec::f(x) + spec.noise_sd * rng.normal();
}

}  // namespace efe::env
