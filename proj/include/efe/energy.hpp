#pragma once

// Potential-energy functions h_t(y) (the pragmatic term) with exact or
// quadrature expectations under predictive distributions.

#include <cmath>
#include <cstddef>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "efe/belief.hpp"
#include "efe/error.hpp"
#include "efe/stats.hpp"
#include "efe/surrogate.hpp"

namespace efe {

enum class BiasKind { Constant, ExponentialDecay };

/// Alignment-bias schedule b_t. Exponential decay b * exp(-rate * t) is
/// nonincreasing for b, rate >= 0.
struct BiasSchedule {
  BiasKind kind = BiasKind::Constant;
  double amplitude = 0.0;
  double rate = 0.0;

  static BiasSchedule aligned() { return {BiasKind::Constant, 0.0, 0.0}; }
  static BiasSchedule constant(double b) { return {BiasKind::Constant, b, 0.0}; }
  static BiasSchedule exponential(double b, double rate) {
    require(rate >= 0.0, Errc::InvalidArgument, "decay rate must be >= 0");
    return {BiasKind::ExponentialDecay, b, rate};
  }

  /// Named schedules used by the bandit misalignment sweep (amplitude 2.0).
  static BiasSchedule named(const std::string& name) {
    if (name == "aligned") return aligned();
    if (name == "constant") return constant(2.0);
    if (name == "slow") return exponential(2.0, 0.02);
    if (name == "fast") return exponential(2.0, 0.25);
    throw Error(Errc::ConfigValidation, "unknown bias schedule '" + name + "' (aligned|constant|slow|fast)");
  }

  double at(double t) const {
    if (kind == BiasKind::Constant) return amplitude;
    return amplitude * std::exp(-rate * t);
  }
};

struct QuadraticEnergy {
  double a = 0.25;
  double c = 0.0;
};

struct SaturationEnergy {
  double y_max = 60.0;
};

struct BiasedRegretEnergy {
  double y_star = 0.0;
  BiasSchedule schedule;
};

/// Placeholder for the nested preference acquisition; its expectation is
/// owned by the preference module because it needs the preference posterior.
struct PreferenceEnergy {
  double gamma = 1.0;
};

using EnergySpec = std::variant<QuadraticEnergy, SaturationEnergy, BiasedRegretEnergy, PreferenceEnergy>;

inline std::string energy_name(const EnergySpec& e) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, QuadraticEnergy>) return "quadratic";
        else if constexpr (std::is_same_v<T, SaturationEnergy>) return "saturation";
        else if constexpr (std::is_same_v<T, BiasedRegretEnergy>) return "biased-regret";
        else return "preference-efe";
      },
      e);
}

inline double quadratic_energy(double y, double a, double c) {
  require(a >= 0.0, Errc::InvalidArgument, "quadratic curvature must be >= 0");
  return a * (y - c) * (y - c);
}

inline double expected_quadratic(const PredictiveDistribution& pred, double a, double c) {
  require(a >= 0.0, Errc::InvalidArgument, "quadratic curvature must be >= 0");
  const double d = pred.mean - c;
  return a * (d * d + pred.variance);
}

/// P(y > y_max) under a Gaussian predictive.
inline double expected_saturation_indicator(const PredictiveDistribution& pred, double y_max) {
  if (std::isinf(y_max)) return y_max > 0 ? 0.0 : 1.0;
  if (pred.variance <= 0.0) return pred.mean > y_max ? 1.0 : 0.0;
  return 1.0 - stats::normal_cdf((y_max - pred.mean) / pred.sd());
}

/// P(y > y_max) under the belief-weighted Poisson mixture at action x.
inline double expected_saturation_indicator(const DiscreteBelief& belief, const DiscreteObservationModel& obs,
                                            std::size_t x, double y_max) {
  require(obs.kind() == OutcomeKind::NonnegativeCount, Errc::InvalidArgument, "Poisson model expected");
  double p = 0.0;
  for (std::size_t s = 0; s < belief.size(); ++s) {
    const double q = belief.prob(s);
    if (q > 0.0) p += q * stats::poisson_upper_tail(obs.location(s, x), y_max);
  }
  return p;
}

inline double biased_regret(double y, double y_star, const BiasSchedule& schedule, double t) {
  return std::abs(y - y_star) + schedule.at(t) * (y - y_star);
}

inline double expected_biased_regret(const PredictiveDistribution& pred, double y_star, const BiasSchedule& schedule,
                                     double t) {
  const double b = schedule.at(t);
  const double abs_part = pred.variance > 0.0
                              ? stats::shifted_abs_expectation({pred.mean, pred.sd()}, y_star)
                              : std::abs(pred.mean - y_star);
  return abs_part + b * (pred.mean - y_star);
}

/// |h_t(y) - r(y)| <= |b_t| * diameter for the biased-regret surrogate.
inline double alignment_bound(const BiasSchedule& schedule, double t, double outcome_diameter) {
  return std::abs(schedule.at(t)) * outcome_diameter;
}

/// h_t(y) for scalar outcomes.
inline double evaluate_energy(const EnergySpec& spec, double y, double t) {
  return std::visit(
      [&](const auto& e) -> double {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, QuadraticEnergy>) return quadratic_energy(y, e.a, e.c);
        else if constexpr (std::is_same_v<T, SaturationEnergy>) return y > e.y_max ? 1.0 : 0.0;
        else if constexpr (std::is_same_v<T, BiasedRegretEnergy>) return biased_regret(y, e.y_star, e.schedule, t);
        else throw Error(Errc::InvalidArgument, "preference energy has no scalar form");
      },
      spec);
}

/// E[h_t(y)] for y ~ N(pred.mean, pred.variance), in closed form.
inline double expected_energy(const EnergySpec& spec, const PredictiveDistribution& pred, double t) {
  return std::visit(
      [&](const auto& e) -> double {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, QuadraticEnergy>) return expected_quadratic(pred, e.a, e.c);
        else if constexpr (std::is_same_v<T, SaturationEnergy>) return expected_saturation_indicator(pred, e.y_max);
        else if constexpr (std::is_same_v<T, BiasedRegretEnergy>)
          return expected_biased_regret(pred, e.y_star, e.schedule, t);
        else throw Error(Errc::InvalidArgument, "preference energy has no scalar form");
      },
      spec);
}

/// integral p(y | x, s) h_t(y) dy for one hypothesis of a discrete model.
inline double conditional_expected_energy(const EnergySpec& spec, const DiscreteObservationModel& obs, std::size_t s,
                                          std::size_t x, double t) {
  if (obs.kind() == OutcomeKind::ContinuousScalar) {
    return expected_energy(spec, {obs.location(s, x), obs.sd() * obs.sd()}, t);
  }
  if (const auto* sat = std::get_if<SaturationEnergy>(&spec)) {
    return stats::poisson_upper_tail(obs.location(s, x), sat->y_max);
  }
  const auto& w = obs.window(s, x);
  double acc = 0.0;
  for (std::size_t k = 0; k < w.pmf.size(); ++k) {
    acc += w.pmf[k] * evaluate_energy(spec, static_cast<double>(w.first + static_cast<std::int64_t>(k)), t);
  }
  return acc;
}

/// Table of per-hypothesis expected energies for a time-invariant h.
class ConditionalEnergyTable {
 public:
  ConditionalEnergyTable(const EnergySpec& spec, const DiscreteObservationModel& obs, double t = 1.0)
      : n_act_(obs.n_actions()), values_(obs.n_hypotheses() * obs.n_actions()) {
    for (std::size_t s = 0; s < obs.n_hypotheses(); ++s) {
      for (std::size_t x = 0; x < n_act_; ++x) values_[s * n_act_ + x] = conditional_expected_energy(spec, obs, s, x, t);
    }
  }

  double operator()(std::size_t s, std::size_t x) const { return values_[s * n_act_ + x]; }

  /// E_{p(y|x,D)}[h] = sum_s q(s) integral p(y|x,s) h(y).
  double expected(const DiscreteBelief& belief, std::size_t x) const {
    double acc = 0.0;
    for (std::size_t s = 0; s < belief.size(); ++s) {
      const double q = belief.prob(s);
      if (q > 0.0) acc += q * (*this)(s, x);
    }
    return acc;
  }

 private:
  std::size_t n_act_;
  std::vector<double> values_;
};

}  // namespace efe
