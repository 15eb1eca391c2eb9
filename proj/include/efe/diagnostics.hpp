#pragma once

// Runtime checks of the consistency and regret analyses: observation gaps,
// instant expected regret, the sample-complexity bound and the cumulative
// regret bound.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "efe/belief.hpp"
#include "efe/energy.hpp"
#include "efe/error.hpp"
#include "efe/surrogate.hpp"

namespace efe {

struct ObservationGap {
  std::vector<double> delta;  // Delta_s(x), zero at the true index
  double weighted_average = 0.0;
};

/// Delta_s(x) = E[h | x, s] - E[h | x, s*] from per-hypothesis expected
/// energies; the weighted average is sum_{s != s*} Delta_s q(s) / sum_{s != s*} q(s).
inline ObservationGap observation_gap(std::span<const double> conditional_energy, const DiscreteBelief& belief,
                                      std::size_t true_index) {
  require(conditional_energy.size() == belief.size(), Errc::InvalidArgument, "energy/belief size mismatch");
  require(true_index < belief.size(), Errc::UnknownHypothesis, "true hypothesis index out of range");
  ObservationGap g;
  g.delta.resize(belief.size());
  double num = 0.0;
  double mass = 0.0;
  for (std::size_t s = 0; s < belief.size(); ++s) {
    g.delta[s] = s == true_index ? 0.0 : conditional_energy[s] - conditional_energy[true_index];
    if (s != true_index) {
      num += g.delta[s] * belief.prob(s);
      mass += belief.prob(s);
    }
  }
  if (mass < 1e-15) throw Error(Errc::DegenerateMass, "posterior mass off the truth below 1e-15");
  g.weighted_average = num / mass;
  return g;
}

inline std::vector<double> conditional_energies(const EnergySpec& energy, const DiscreteObservationModel& obs,
                                                std::size_t x, double t) {
  std::vector<double> e(obs.n_hypotheses());
  for (std::size_t s = 0; s < e.size(); ++s) e[s] = conditional_expected_energy(energy, obs, s, x, t);
  return e;
}

inline ObservationGap observation_gap(const DiscreteObservationModel& obs, const EnergySpec& energy, std::size_t x,
                                      const DiscreteBelief& belief, std::size_t true_index, double t = 1.0) {
  return observation_gap(conditional_energies(energy, obs, x, t), belief, true_index);
}

/// r_t = E_{p(y|x,D)}[h] - E[h | x, s*], evaluated as the difference of the
/// two integrals.
inline double instant_expected_regret(std::span<const double> conditional_energy, const DiscreteBelief& belief,
                                      std::size_t true_index) {
  require(conditional_energy.size() == belief.size(), Errc::InvalidArgument, "energy/belief size mismatch");
  double predictive = 0.0;
  for (std::size_t s = 0; s < belief.size(); ++s) predictive += belief.prob(s) * conditional_energy[s];
  return predictive - conditional_energy[true_index];
}

inline double instant_expected_regret(const DiscreteBelief& belief, const DiscreteObservationModel& obs,
                                      const EnergySpec& energy, std::size_t x, std::size_t true_index,
                                      double t = 1.0) {
  return instant_expected_regret(conditional_energies(energy, obs, x, t), belief, true_index);
}

/// ceil(beta_upper * H0 / (A_lower * epsilon)), at least 1.
inline std::size_t sample_complexity(double h0, double a_lower, double beta_upper, double epsilon) {
  if (!(a_lower > 0.0)) throw Error(Errc::NonpositiveDiscriminability, "distinguishability lower bound must be > 0");
  require(epsilon > 0.0, Errc::InvalidArgument, "epsilon must be > 0");
  require(h0 >= 0.0 && beta_upper >= 0.0, Errc::InvalidArgument, "H0 and beta must be >= 0");
  const double t = std::ceil(beta_upper * h0 / (a_lower * epsilon) - 1e-12);
  return static_cast<std::size_t>(std::max(1.0, t));
}

/// Largest absolute finite-difference slope of r over adjacent sorted grid values.
inline double lipschitz_estimate(std::span<const double> outcome_grid, const std::function<double(double)>& regret) {
  std::vector<double> ys(outcome_grid.begin(), outcome_grid.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  double l = 0.0;
  for (std::size_t i = 1; i < ys.size(); ++i) {
    l = std::max(l, std::abs(regret(ys[i]) - regret(ys[i - 1])) / (ys[i] - ys[i - 1]));
  }
  return l;
}

/// C = 2 / ln(1 + sigma^-2).
inline double regret_constant(double noise_var) {
  require(noise_var > 0.0, Errc::InvalidArgument, "noise variance must be > 0");
  return 2.0 / std::log1p(1.0 / noise_var);
}

/// Information gain of the greedy variance-maximizing T-point design on the
/// grid: an estimate of the maximum information gain rho_T.
inline double greedy_max_information_gain(const KernelSpec& kernel, std::span<const double> grid, double noise_var,
                                          std::size_t horizon) {
  require(noise_var > 0.0, Errc::InvalidArgument, "noise variance must be > 0");
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      Eigen::Matrix<double, 1, 1> a, b;
      a(0) = grid[static_cast<std::size_t>(i)];
      b(0) = grid[static_cast<std::size_t>(j)];
      cov(i, j) = kernel(a, b);
    }
  }
  double total = 0.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    Eigen::Index best = 0;
    cov.diagonal().maxCoeff(&best);
    const double var = std::max(0.0, cov(best, best));
    total += point_mutual_information(var, noise_var);
    const Eigen::VectorXd col = cov.col(best);
    cov.noalias() -= col * col.transpose() / (var + noise_var);
  }
  return total;
}

struct RegretBoundTerms {
  double beta_bar = 0.0;      // max_t beta_t
  double rho = 0.0;           // maximum information gain estimate
  double lipschitz = 1.0;     // L
  double zeta_sqrt = 0.0;     // sqrt(zeta_T)
  std::size_t horizon = 0;    // T
  double noise_var = 0.0;     // sigma^2
  double bias_sum = 0.0;      // sum_t B_t
};

/// beta_bar rho + L (sqrt(zeta_T) + sqrt(2/pi)) sqrt(C T rho) + sum B_t.
inline double regret_bound(const RegretBoundTerms& b) {
  const double c = regret_constant(b.noise_var);
  const double explore = b.lipschitz * (b.zeta_sqrt + std::sqrt(2.0 / std::numbers::pi)) *
                         std::sqrt(c * static_cast<double>(b.horizon) * b.rho);
  return b.beta_bar * b.rho + explore + b.bias_sum;
}

}  // namespace efe
