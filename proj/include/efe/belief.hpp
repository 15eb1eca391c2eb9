#pragma once

// Finite-hypothesis Bayesian filtering: posterior maintenance, entropy,
// error mass and discrete mutual information.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "efe/error.hpp"
#include "efe/stats.hpp"

namespace efe {

/// Normalized posterior over a finite, ordered hypothesis set. Immutable:
/// every update returns a new value. Zero-probability hypotheses are kept so
/// indices stay stable across a run.
class DiscreteBelief {
 public:
  DiscreteBelief(std::vector<std::string> ids, std::vector<double> probs)
      : ids_(std::move(ids)), probs_(std::move(probs)) {
    require(!ids_.empty(), Errc::InvalidArgument, "belief needs at least one hypothesis");
    require(ids_.size() == probs_.size(), Errc::InvalidArgument, "ids/probs length mismatch");
    std::unordered_set<std::string> seen;
    for (const auto& id : ids_) {
      require(seen.insert(id).second, Errc::InvalidArgument, "duplicate hypothesis id '" + id + "'");
    }
    double total = 0.0;
    for (double p : probs_) {
      require(std::isfinite(p) && p >= 0.0, Errc::InvalidArgument, "probabilities must be finite and >= 0");
      total += p;
    }
    require(std::abs(total - 1.0) <= 1e-9, Errc::InvalidArgument, "probabilities must sum to 1");
    for (double& p : probs_) p /= total;
  }

  static DiscreteBelief uniform(std::vector<std::string> ids) {
    const std::size_t n = ids.size();
    require(n > 0, Errc::InvalidArgument, "belief needs at least one hypothesis");
    return {std::move(ids), std::vector<double>(n, 1.0 / static_cast<double>(n))};
  }

  /// `mass` on hypothesis `index`, the rest spread evenly over the others.
  static DiscreteBelief concentrated(std::vector<std::string> ids, std::size_t index, double mass) {
    const std::size_t n = ids.size();
    require(index < n, Errc::UnknownHypothesis, "prior index out of range");
    require(mass >= 0.0 && mass <= 1.0, Errc::InvalidArgument, "prior mass must lie in [0,1]");
    std::vector<double> p(n, n > 1 ? (1.0 - mass) / static_cast<double>(n - 1) : 0.0);
    p[index] = n > 1 ? mass : 1.0;
    return {std::move(ids), std::move(p)};
  }

  std::size_t size() const { return probs_.size(); }
  std::span<const double> probs() const { return probs_; }
  double prob(std::size_t i) const { return probs_.at(i); }
  const std::vector<std::string>& ids() const { return ids_; }

  std::size_t index_of(const std::string& id) const {
    const auto it = std::find(ids_.begin(), ids_.end(), id);
    if (it == ids_.end()) throw Error(Errc::UnknownHypothesis, "no hypothesis '" + id + "'");
    return static_cast<std::size_t>(it - ids_.begin());
  }

  std::size_t mode() const {
    return static_cast<std::size_t>(std::max_element(probs_.begin(), probs_.end()) - probs_.begin());
  }

  /// Posterior proportional to prior * exp(log_lik), normalized in log space.
  DiscreteBelief reweighted(std::span<const double> log_lik) const {
    require(log_lik.size() == size(), Errc::InvalidArgument, "likelihood length mismatch");
    std::vector<double> lp(size(), -INFINITY);
    double peak = -INFINITY;
    for (std::size_t s = 0; s < size(); ++s) {
      if (probs_[s] > 0.0 && !std::isnan(log_lik[s])) {
        lp[s] = std::log(probs_[s]) + log_lik[s];
        peak = std::max(peak, lp[s]);
      }
    }
    if (!std::isfinite(peak)) {
      throw Error(Errc::AllZeroLikelihood, "observation has zero likelihood under every supported hypothesis");
    }
    std::vector<double> next(size(), 0.0);
    double total = 0.0;
    for (std::size_t s = 0; s < size(); ++s) {
      if (std::isfinite(lp[s])) {
        next[s] = std::exp(lp[s] - peak);
        total += next[s];
      }
    }
    for (double& p : next) p /= total;
    DiscreteBelief out;
    out.ids_ = ids_;
    out.probs_ = std::move(next);
    return out;
  }

 private:
  DiscreteBelief() = default;

  std::vector<std::string> ids_;
  std::vector<double> probs_;
};

enum class OutcomeKind { ContinuousScalar, NonnegativeCount };

/// Per-hypothesis conditional outcome law p(y | x, s) on a finite action set.
/// Gaussian models carry a mean table and a shared standard deviation;
/// Poisson models carry an expected-count table and precomputed truncation
/// windows holding at least 1 - 1e-10 of each conditional's mass.
class DiscreteObservationModel {
 public:
  static constexpr double kPoissonTailMass = 1e-10;

  static DiscreteObservationModel gaussian(std::size_t n_hypotheses, std::size_t n_actions,
                                           std::vector<double> means, double sd) {
    require(means.size() == n_hypotheses * n_actions, Errc::InvalidArgument, "mean table has wrong size");
    require(sd >= 0.0 && std::isfinite(sd), Errc::InvalidArgument, "observation sd must be >= 0");
    DiscreteObservationModel m;
    m.kind_ = OutcomeKind::ContinuousScalar;
    m.n_hyp_ = n_hypotheses;
    m.n_act_ = n_actions;
    m.params_ = std::move(means);
    m.sd_ = sd;
    return m;
  }

  /// `expected_counts[s * n_actions + x]` is the Poisson mean for (s, x).
  static DiscreteObservationModel poisson(std::size_t n_hypotheses, std::size_t n_actions,
                                          std::vector<double> expected_counts) {
    require(expected_counts.size() == n_hypotheses * n_actions, Errc::InvalidArgument,
            "rate table has wrong size");
    DiscreteObservationModel m;
    m.kind_ = OutcomeKind::NonnegativeCount;
    m.n_hyp_ = n_hypotheses;
    m.n_act_ = n_actions;
    m.params_ = std::move(expected_counts);
    m.windows_.reserve(m.params_.size());
    m.entropies_.reserve(m.params_.size());
    for (double lambda : m.params_) {
      require(lambda >= 0.0 && std::isfinite(lambda), Errc::InvalidArgument, "Poisson mean must be finite and >= 0");
      auto w = stats::poisson_window(lambda, kPoissonTailMass);
      double h = 0.0;
      for (double p : w.pmf) {
        if (p > 0.0) h -= p * std::log(p);
      }
      m.entropies_.push_back(h);
      m.windows_.push_back(std::move(w));
    }
    return m;
  }

  OutcomeKind kind() const { return kind_; }
  std::size_t n_hypotheses() const { return n_hyp_; }
  std::size_t n_actions() const { return n_act_; }
  double sd() const { return sd_; }

  /// Gaussian mean or Poisson expected count.
  double location(std::size_t s, std::size_t x) const { return params_[index(s, x)]; }

  const stats::PoissonWindow& window(std::size_t s, std::size_t x) const { return windows_[index(s, x)]; }

  /// Entropy (nats) of p(. | x, s): differential for Gaussian, Shannon for Poisson.
  double conditional_entropy(std::size_t s, std::size_t x) const {
    if (kind_ == OutcomeKind::ContinuousScalar) {
      return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * sd_ * sd_);
    }
    return entropies_[index(s, x)];
  }

  double log_likelihood(std::size_t s, std::size_t x, double y) const {
    const double loc = location(s, x);
    if (kind_ == OutcomeKind::ContinuousScalar) {
      if (sd_ == 0.0) return y == loc ? 0.0 : -INFINITY;
      const double z = (y - loc) / sd_;
      return -0.5 * z * z - std::log(sd_) - 0.5 * std::log(2.0 * std::numbers::pi);
    }
    if (y < 0.0 || y != std::floor(y)) return -INFINITY;
    return stats::poisson_log_pmf(static_cast<std::int64_t>(y), loc);
  }

  std::vector<double> log_likelihoods(std::size_t x, double y) const {
    require(x < n_act_, Errc::InvalidArgument, "action index out of range");
    std::vector<double> ll(n_hyp_);
    for (std::size_t s = 0; s < n_hyp_; ++s) ll[s] = log_likelihood(s, x, y);
    return ll;
  }

 private:
  DiscreteObservationModel() = default;

  std::size_t index(std::size_t s, std::size_t x) const { return s * n_act_ + x; }

  OutcomeKind kind_ = OutcomeKind::ContinuousScalar;
  std::size_t n_hyp_ = 0;
  std::size_t n_act_ = 0;
  std::vector<double> params_;
  double sd_ = 0.0;
  std::vector<stats::PoissonWindow> windows_;
  std::vector<double> entropies_;
};

/// Shannon entropy in nats with 0 ln 0 = 0.
inline double entropy(const DiscreteBelief& belief) {
  double h = 0.0;
  for (double p : belief.probs()) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::max(0.0, h);
}

inline DiscreteBelief bayes_update(const DiscreteBelief& belief, const DiscreteObservationModel& obs, std::size_t x,
                                   double y) {
  require(obs.n_hypotheses() == belief.size(), Errc::InvalidArgument, "model/belief size mismatch");
  const auto ll = obs.log_likelihoods(x, y);
  return belief.reweighted(ll);
}

/// Total posterior mass on hypotheses other than `true_index`, summed
/// directly so tiny masses are not lost to 1 - q cancellation.
inline double error_mass(const DiscreteBelief& belief, std::size_t true_index) {
  require(true_index < belief.size(), Errc::UnknownHypothesis, "true hypothesis index out of range");
  double w = 0.0;
  for (std::size_t s = 0; s < belief.size(); ++s) {
    if (s != true_index) w += belief.prob(s);
  }
  return std::clamp(w, 0.0, 1.0);
}

inline double error_mass(const DiscreteBelief& belief, const std::string& true_id) {
  return error_mass(belief, belief.index_of(true_id));
}

namespace detail {

inline constexpr double kQuadHalfWidth = 8.0;   // component mean +- 8 sd
inline constexpr std::size_t kQuadNodes = 2049;  // nodes per component

// Mixture entropy of sum_k weight_k N(mean_k, sd^2) by trapezoid rule on the
// merged per-component grids.
inline double gaussian_mixture_entropy(std::span<const std::pair<double, double>> comps, double sd) {
  std::vector<double> nodes;
  nodes.reserve(comps.size() * kQuadNodes);
  for (const auto& [mean, weight] : comps) {
    const double lo = mean - kQuadHalfWidth * sd;
    const double step = 2.0 * kQuadHalfWidth * sd / static_cast<double>(kQuadNodes - 1);
    for (std::size_t i = 0; i < kQuadNodes; ++i) nodes.push_back(lo + step * static_cast<double>(i));
  }
  std::sort(nodes.begin(), nodes.end());
  const double dedupe_tol = 1e-12 * std::max(1.0, sd);
  nodes.erase(std::unique(nodes.begin(), nodes.end(),
                          [&](double a, double b) { return std::abs(a - b) <= dedupe_tol; }),
              nodes.end());

  std::vector<double> dens(nodes.size(), 0.0);
  const double norm = stats::kInvSqrt2Pi / sd;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    double m = 0.0;
    for (const auto& [mean, weight] : comps) {
      const double z = (nodes[i] - mean) / sd;
      if (std::abs(z) < 40.0) m += weight * norm * std::exp(-0.5 * z * z);
    }
    dens[i] = m;
  }
  double mass = 0.0;
  double h = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double dx = nodes[i] - nodes[i - 1];
    const double a = dens[i - 1];
    const double b = dens[i];
    mass += 0.5 * dx * (a + b);
    const double fa = a > 0.0 ? -a * std::log(a) : 0.0;
    const double fb = b > 0.0 ? -b * std::log(b) : 0.0;
    h += 0.5 * dx * (fa + fb);
  }
  if (std::abs(mass - 1.0) > 1e-6) {
    throw Error(Errc::QuadratureFailure, "mixture mass " + std::to_string(mass) + " deviates from 1");
  }
  return h;
}

}  // namespace detail

/// I(s; (x, y)) = H[sum_s q(s) p(.|x,s)] - sum_s q(s) H[p(.|x,s)].
inline double discrete_mutual_information(const DiscreteBelief& belief, const DiscreteObservationModel& obs,
                                          std::size_t x) {
  require(obs.n_hypotheses() == belief.size(), Errc::InvalidArgument, "model/belief size mismatch");
  require(x < obs.n_actions(), Errc::InvalidArgument, "action index out of range");
  const auto q = belief.probs();
  double cond_h = 0.0;
  double mix_h = 0.0;

  if (obs.kind() == OutcomeKind::ContinuousScalar) {
    const double sd = obs.sd();
    if (sd == 0.0) {
      // Noise-free outcomes: I equals the entropy of the induced partition.
      std::vector<std::pair<double, double>> groups;
      for (std::size_t s = 0; s < q.size(); ++s) {
        if (q[s] <= 0.0) continue;
        const double mu = obs.location(s, x);
        auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == mu; });
        if (it == groups.end()) groups.emplace_back(mu, q[s]);
        else it->second += q[s];
      }
      double h = 0.0;
      for (const auto& g : groups) h -= g.second * std::log(g.second);
      return std::max(0.0, h);
    }
    // Components sharing a mean are merged before integration.
    std::vector<std::pair<double, double>> comps;
    for (std::size_t s = 0; s < q.size(); ++s) {
      if (q[s] <= 0.0) continue;
      const double mu = obs.location(s, x);
      auto it = std::find_if(comps.begin(), comps.end(), [&](const auto& c) { return c.first == mu; });
      if (it == comps.end()) comps.emplace_back(mu, q[s]);
      else it->second += q[s];
    }
    if (comps.size() == 1) return 0.0;
    mix_h = detail::gaussian_mixture_entropy(comps, sd);
    cond_h = obs.conditional_entropy(0, x);
  } else {
    std::int64_t lo = std::numeric_limits<std::int64_t>::max();
    std::int64_t hi = std::numeric_limits<std::int64_t>::min();
    for (std::size_t s = 0; s < q.size(); ++s) {
      if (q[s] <= 0.0) continue;
      const auto& w = obs.window(s, x);
      lo = std::min(lo, w.first);
      hi = std::max(hi, w.last());
      cond_h += q[s] * obs.conditional_entropy(s, x);
    }
    std::vector<double> mix(static_cast<std::size_t>(hi - lo + 1), 0.0);
    for (std::size_t s = 0; s < q.size(); ++s) {
      if (q[s] <= 0.0) continue;
      const auto& w = obs.window(s, x);
      const auto off = static_cast<std::size_t>(w.first - lo);
      for (std::size_t k = 0; k < w.pmf.size(); ++k) mix[off + k] += q[s] * w.pmf[k];
    }
    double mass = 0.0;
    for (double m : mix) {
      mass += m;
      if (m > 0.0) mix_h -= m * std::log(m);
    }
    if (mass < 1.0 - 1e-8) {
      throw Error(Errc::QuadratureFailure, "Poisson predictive mass deficit " + std::to_string(1.0 - mass));
    }
  }

  const double info = mix_h - cond_h;
  if (info < -1e-9) {
    throw Error(Errc::QuadratureFailure, "negative mutual information " + std::to_string(info));
  }
  return std::max(0.0, info);
}

}  // namespace efe
