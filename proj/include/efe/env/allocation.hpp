#pragma once

// Synthetic 40-d -> 4-d resource-allocation map standing in for a power-flow
// testbed. The map depends on x only through four block means, so its
// optimum over the box can be found on a 4-d grid.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>

#include "efe/error.hpp"
#include "efe/rng.hpp"

namespace efe::env {

inline constexpr std::size_t kAllocationInputDim = 40;
inline constexpr std::size_t kAllocationOutcomeDim = 4;
inline constexpr std::size_t kAllocationRank = 2;

using Outcome4 = Eigen::Vector4d;

/// y_k = offset_k + scale_k * (g_k . u - 1/2 sum_r (l_kr . (u - m_k))^2)
/// with u the standardized block means of x. Parameters are drawn from
/// `seed`; offset/scale standardize each outcome over 512 uniform inputs.
class AllocationMap {
 public:
  static constexpr double kBlockMeanCenter = 0.5;
  static constexpr double kBlockMeanSd = 0.0912870929175277;  // sqrt(1/120)

  static AllocationMap generate(std::uint64_t seed) {
    AllocationMap m;
    m.seed_ = seed;
    Rng rng(seed);
    for (std::size_t k = 0; k < kAllocationOutcomeDim; ++k) {
      auto& p = m.params_[k];
      for (int i = 0; i < 4; ++i) p.g(i) = 0.5 * rng.normal();
      for (int i = 0; i < 4; ++i) p.center(i) = rng.normal();
      for (std::size_t r = 0; r < kAllocationRank; ++r) {
        for (int i = 0; i < 4; ++i) p.lowrank(i, static_cast<int>(r)) = 0.5 * rng.normal();
      }
      p.offset = 0.0;
      p.scale = 1.0;
    }
    constexpr int kCalib = 512;
    Eigen::Matrix<double, kCalib, 4> raw;
    Eigen::VectorXd x(kAllocationInputDim);
    for (int n = 0; n < kCalib; ++n) {
      for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.uniform();
      raw.row(n) = m.evaluate(x).transpose();
    }
    for (std::size_t k = 0; k < kAllocationOutcomeDim; ++k) {
      const auto col = raw.col(static_cast<int>(k));
      const double mean = col.mean();
      const double sd = std::sqrt((col.array() - mean).square().mean());
      m.params_[k].offset = -mean / sd;
      m.params_[k].scale = 1.0 / sd;
    }
    return m;
  }

  std::uint64_t seed() const { return seed_; }

  /// Standardized block means u_k = (mean(x[10k..10k+9]) - 0.5) / sqrt(1/120).
  Eigen::Vector4d project(const Eigen::VectorXd& x) const {
    require(static_cast<std::size_t>(x.size()) == kAllocationInputDim, Errc::InvalidArgument,
            "allocation input must have 40 entries");
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (!(x(i) >= 0.0 && x(i) <= 1.0)) {
        throw Error(Errc::OutOfDomain, "allocation input " + std::to_string(i) + " outside [0, 1]");
      }
    }
    Eigen::Vector4d u;
    for (int k = 0; k < 4; ++k) u(k) = (x.segment(10 * k, 10).mean() - kBlockMeanCenter) / kBlockMeanSd;
    return u;
  }

  Outcome4 evaluate_projected(const Eigen::Vector4d& u) const {
    Outcome4 y;
    for (std::size_t k = 0; k < kAllocationOutcomeDim; ++k) {
      const auto& p = params_[k];
      const Eigen::Vector2d proj = p.lowrank.transpose() * (u - p.center);
      y(static_cast<int>(k)) = p.offset + p.scale * (p.g.dot(u) - 0.5 * proj.squaredNorm());
    }
    return y;
  }

  /// Noiseless outcome.
  Outcome4 evaluate(const Eigen::VectorXd& x) const { return evaluate_projected(project(x)); }

  /// max of w . y over the box, searched on a regular grid in u-space.
  double optimum(const Eigen::Vector4d& weights, int points_per_dim = 41) const {
    const double half = kBlockMeanCenter / kBlockMeanSd;
    double best = -INFINITY;
    Eigen::Vector4d u;
    for (int a = 0; a < points_per_dim; ++a) {
      for (int b = 0; b < points_per_dim; ++b) {
        for (int c = 0; c < points_per_dim; ++c) {
          for (int d = 0; d < points_per_dim; ++d) {
            const int idx[4] = {a, b, c, d};
            for (int k = 0; k < 4; ++k) u(k) = -half + 2.0 * half * idx[k] / (points_per_dim - 1);
            best = std::max(best, weights.dot(evaluate_projected(u)));
          }
        }
      }
    }
    return best;
  }

 private:
  struct Params {
    Eigen::Vector4d g;
    Eigen::Vector4d center;
    Eigen::Matrix<double, 4, kAllocationRank> lowrank;
    double offset = 0.0;
    double scale = 1.0;
  };

  std::uint64_t seed_ = 0;
  std::array<Params, kAllocationOutcomeDim> params_{};
};

/// Noiseless map plus independent N(0, noise_sd^2) per outcome.
inline Outcome4 allocation_observe(const AllocationMap& map, const Eigen::VectorXd& x, double noise_sd, Rng& rng) {
  Outcome4 y = map.evaluate(x);
  for (int k = 0; k < 4; ++k) y(k) += noise_sd * rng.normal();
  return y;
}

}  // namespace efe::env
