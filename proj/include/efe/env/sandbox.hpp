#pragma once

// Six-state, four-action discrete sandbox with Gaussian outcomes.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "efe/belief.hpp"
#include "efe/error.hpp"
#include "efe/rng.hpp"

namespace efe::env {

inline constexpr double kSandboxCurvatureMin = 0.15;
inline constexpr double kSandboxCurvatureMax = 0.35;

struct SandboxSpec {
  std::size_t n_states = 6;
  std::size_t n_actions = 4;
  double obs_std = 0.2;
  std::vector<double> means;  // row-major [s * n_actions + x]

  /// Action 0 separates the states (mean 1.5 (s - 3.5) / 2.5 for s = 1..6);
  /// actions 1..3 differ only by 0.05 (s mod 2).
  static SandboxSpec standard(double obs_std = 0.2) {
    require(obs_std >= 0.0, Errc::InvalidArgument, "obs_std must be >= 0");
    SandboxSpec spec;
    spec.obs_std = obs_std;
    spec.means.resize(spec.n_states * spec.n_actions);
    for (std::size_t i = 0; i < spec.n_states; ++i) {
      const double s = static_cast<double>(i + 1);
      for (std::size_t x = 0; x < spec.n_actions; ++x) {
        spec.means[i * spec.n_actions + x] =
            x == 0 ? 1.5 * (s - 3.5) / 2.5 : 0.05 * static_cast<double>((i + 1) % 2);
      }
    }
    return spec;
  }

  double mean(std::size_t s, std::size_t x) const { return means[s * n_actions + x]; }

  std::vector<std::string> state_ids() const {
    std::vector<std::string> ids;
    for (std::size_t s = 0; s < n_states; ++s) ids.push_back("s" + std::to_string(s + 1));
    return ids;
  }

  DiscreteObservationModel model() const {
    return DiscreteObservationModel::gaussian(n_states, n_actions, means, obs_std);
  }

  /// Average |mu_{s,x} - mu_{s',x}| over unordered state pairs.
  double mean_pairwise_gap(std::size_t x) const {
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t a = 0; a < n_states; ++a) {
      for (std::size_t b = a + 1; b < n_states; ++b) {
        acc += std::abs(mean(a, x) - mean(b, x));
        ++n;
      }
    }
    return acc / static_cast<double>(n);
  }
};

inline void validate_sandbox_curvature(double a) {
  require(a >= kSandboxCurvatureMin && a <= kSandboxCurvatureMax, Errc::ConfigValidation,
          "sandbox energy curvature a must lie in [0.15, 0.35]");
}

/// One draw of y ~ N(mu_{s,x}, sigma^2); consumes two uniforms.
inline double sandbox_observe(const SandboxSpec& spec, std::size_t s_true, std::size_t x, Rng& rng) {
  require(s_true < spec.n_states && x < spec.n_actions, Errc::InvalidArgument, "sandbox index out of range");
  return spec.mean(s_true, x) + spec.obs_std * rng.normal();
}

}  // namespace efe::env
