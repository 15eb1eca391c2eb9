#pragma once

// Pairwise probit preference learning over a linear utility g(y) = w . y and
// the nested acquisition for jointly evaluated candidate pairs.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "efe/error.hpp"
#include "efe/rng.hpp"
#include "efe/stats.hpp"
#include "efe/surrogate.hpp"

namespace efe {

inline constexpr std::size_t kPreferenceDim = 4;
using PrefVector = Eigen::Vector4d;
using PrefMatrix = Eigen::Matrix4d;

/// Gaussian (Laplace) posterior over utility weights.
struct PreferenceModel {
  PrefVector mean = PrefVector::Zero();
  PrefMatrix cov = 25.0 * PrefMatrix::Identity();
  double lambda = 0.1;

  static PreferenceModel prior(double variance = 25.0, double lambda = 0.1) {
    PreferenceModel m;
    m.cov = variance * PrefMatrix::Identity();
    m.lambda = lambda;
    m.validate();
    return m;
  }

  /// A point-mass model: E[g] = w . y and no parameter uncertainty.
  static PreferenceModel fixed(const PrefVector& w, double lambda = 0.1) {
    PreferenceModel m;
    m.mean = w;
    m.cov = PrefMatrix::Zero();
    m.lambda = lambda;
    return m;
  }

  void validate() const {
    require(lambda > 0.0, Errc::InvalidArgument, "probit scale lambda must be > 0");
    require((cov - cov.transpose()).cwiseAbs().maxCoeff() <= 1e-12, Errc::InvalidArgument,
            "preference covariance must be symmetric");
    Eigen::LLT<PrefMatrix> llt(cov + 1e-12 * PrefMatrix::Identity());
    require(llt.info() == Eigen::Success, Errc::FactorizationFailure, "preference covariance not positive definite");
  }

  double expected_utility(const PrefVector& y) const { return mean.dot(y); }
};

struct Comparison {
  PrefVector y1;
  PrefVector y2;
  int z = 1;  // 1 if y1 preferred, 2 otherwise
};

/// P(z = 1) = Phi((g1 - g2) / (sqrt(2) lambda)).
inline double probit_likelihood(double g1, double g2, double lambda) {
  require(lambda > 0.0, Errc::InvalidArgument, "probit scale lambda must be > 0");
  return stats::normal_cdf((g1 - g2) / (stats::kSqrt2 * lambda));
}

/// Decision-maker response under g(y) = a . y. lambda = 0 gives the noiseless
/// argmax (ties to the first outcome). Consumes one uniform either way.
inline int simulate_dm(const PrefVector& y1, const PrefVector& y2, const PrefVector& a, double lambda, Rng& rng) {
  require(lambda >= 0.0, Errc::InvalidArgument, "probit scale lambda must be >= 0");
  const double u = rng.uniform();
  const double g1 = a.dot(y1);
  const double g2 = a.dot(y2);
  if (lambda == 0.0) return g1 >= g2 ? 1 : 2;
  return u < probit_likelihood(g1, g2, lambda) ? 1 : 2;
}

/// Laplace update for one comparison. The log posterior
///   -1/2 (w - m)' S^-1 (w - m) + ln Phi(s kappa w.d),  d = y1 - y2,
/// has its mode on the line w = m + c S d, so damped Newton runs on the
/// scalar c; convergence is measured by the full gradient norm.
inline PreferenceModel laplace_update(const PreferenceModel& model, const Comparison& comp) {
  require(comp.z == 1 || comp.z == 2, Errc::InvalidArgument, "comparison outcome must be 1 or 2");
  const PrefVector d = comp.y1 - comp.y2;
  const PrefVector sd = model.cov * d;
  const double v = d.dot(sd);
  if (d.squaredNorm() == 0.0 || v <= 0.0) return model;

  const double sign = comp.z == 1 ? 1.0 : -1.0;
  const double kappa = 1.0 / (stats::kSqrt2 * model.lambda);
  const double t0 = model.mean.dot(d);
  const double dnorm = d.norm();

  auto objective = [&](double c) { return -0.5 * c * c * v + stats::log_normal_cdf(sign * kappa * (t0 + c * v)); };
  auto hazard = [&](double c) { return stats::normal_hazard(sign * kappa * (t0 + c * v)); };

  double c = 0.0;
  bool converged = false;
  for (int iter = 0; iter < 50; ++iter) {
    const double h = hazard(c);
    const double g = sign * kappa * h - c;  // full gradient = g * d
    if (std::abs(g) * dnorm <= 1e-10) {
      converged = true;
      break;
    }
    const double z = sign * kappa * (t0 + c * v);
    const double curv = 1.0 + kappa * kappa * v * h * (z + h);  // -f''(c) / v
    double step = g / curv;
    const double f0 = objective(c);
    int halvings = 0;
    // Tolerate rounding-level decreases; the 1-D objective is strictly concave.
    const double slack = 1e-13 * (1.0 + std::abs(f0));
    while (objective(c + step) < f0 - slack && halvings < 60) {
      step *= 0.5;
      ++halvings;
    }
    if (c + step == c) {
      converged = std::abs(g) * dnorm <= 1e-8;
      break;
    }
    c += step;
  }
  if (!converged) {
    const double g = sign * kappa * hazard(c) - c;
    if (!(std::abs(g) * dnorm <= 1e-10)) {
      throw Error(Errc::NewtonDivergence, "Laplace mode search did not converge");
    }
  }

  const double z = sign * kappa * (t0 + c * v);
  const double h = stats::normal_hazard(z);
  const double curvature = kappa * kappa * h * (z + h);  // -d^2/dt^2 ln Phi
  PreferenceModel out = model;
  out.mean = model.mean + c * sd;
  out.cov = model.cov - (curvature / (1.0 + curvature * v)) * sd * sd.transpose();
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  return out;
}

inline constexpr std::size_t kPreferenceMiSamples = 256;
inline constexpr std::uint64_t kPreferenceMiSeed = 0x9e3779b97f4a7c15ULL;

/// Fixed standard-normal draws in antithetic pairs (u, -u).
inline const std::array<double, kPreferenceMiSamples>& preference_mi_draws() {
  static const auto draws = [] {
    std::array<double, kPreferenceMiSamples> d{};
    Rng rng(kPreferenceMiSeed);
    for (std::size_t i = 0; i < kPreferenceMiSamples / 2; ++i) {
      d[i] = rng.normal();
      d[i + kPreferenceMiSamples / 2] = -d[i];
    }
    return d;
  }();
  return draws;
}

/// BALD information H[Bern(mean p)] - mean H[Bern(p(w))] for the comparison
/// (y1, y2). Only w . d matters, so w is sampled through that projection.
inline double preference_mi(const PreferenceModel& model, const PrefVector& y1, const PrefVector& y2) {
  const PrefVector d = y1 - y2;
  const double mu = model.mean.dot(d);
  const double var = d.dot(model.cov * d);
  if (!(var > 0.0)) return 0.0;
  const double sd = std::sqrt(var);
  const double kappa = 1.0 / (stats::kSqrt2 * model.lambda);
  const auto& u = preference_mi_draws();
  double p_bar = 0.0;
  double h_bar = 0.0;
  for (double uk : u) {
    const double p = stats::normal_cdf(kappa * (mu + sd * uk));
    p_bar += p;
    h_bar += stats::binary_entropy(p);
  }
  const auto n = static_cast<double>(u.size());
  const double mi = stats::binary_entropy(p_bar / n) - h_bar / n;
  return std::clamp(mi, 0.0, std::log(2.0));
}

/// Outcome predictive at one candidate: per-dimension latent posterior and
/// observation noise.
struct OutcomePrediction {
  std::array<PredictiveDistribution, kPreferenceDim> latent{};
  std::array<double, kPreferenceDim> noise_var{};
};

inline OutcomePrediction predict_outcomes(std::span<const GaussianSurrogate> surrogates, const Eigen::RowVectorXd& x) {
  require(surrogates.size() == kPreferenceDim, Errc::InvalidArgument, "need one surrogate per outcome dimension");
  OutcomePrediction p;
  for (std::size_t k = 0; k < kPreferenceDim; ++k) {
    p.latent[k] = surrogates[k].predict(x);
    p.noise_var[k] = surrogates[k].noise_var();
  }
  return p;
}

inline constexpr std::size_t kNestedSamples = 64;
inline constexpr std::uint64_t kNestedSeed = 0xc2b2ae3d27d4eb4fULL;

/// Fixed standard-normal draws for the predictive outcomes of a pair. Each
/// row holds latent and noise draws for y1, then latent and noise for y2.
inline const std::array<std::array<double, 4 * kPreferenceDim>, kNestedSamples>& nested_draws() {
  static const auto draws = [] {
    std::array<std::array<double, 4 * kPreferenceDim>, kNestedSamples> d{};
    Rng rng(kNestedSeed);
    for (auto& row : d) {
      for (double& v : row) v = rng.normal();
    }
    return d;
  }();
  return draws;
}

struct NestedScore {
  double outcome_info = 0.0;      // sum of per-dimension point MIs at both points
  double preference_info = 0.0;   // E_y[I(g; z)]
  double expected_utility = 0.0;  // E_y[E[g]], averaged over the two outcomes
  double alpha = 0.0;
};

namespace detail {

// The pair's predictive outcomes for one row of nested_draws().
inline void nested_outcomes(const OutcomePrediction& p1, const OutcomePrediction& p2, bool same_point,
                            const std::array<double, 4 * kPreferenceDim>& row, PrefVector& y1, PrefVector& y2) {
  constexpr std::size_t n = kPreferenceDim;
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const double l2 = same_point ? row[k] : row[2 * n + k];
    y1(i) = p1.latent[k].mean + p1.latent[k].sd() * row[k] + std::sqrt(p1.noise_var[k]) * row[n + k];
    y2(i) = p2.latent[k].mean + p2.latent[k].sd() * l2 + std::sqrt(p2.noise_var[k]) * row[3 * n + k];
  }
}

// Everything but the preference term; cheap next to preference_mi.
inline NestedScore nested_base(const OutcomePrediction& p1, const OutcomePrediction& p2, const PreferenceModel& model,
                               bool same_point) {
  NestedScore s;
  for (std::size_t k = 0; k < kPreferenceDim; ++k) {
    s.outcome_info += point_mutual_information(p1.latent[k].variance, p1.noise_var[k]);
    s.outcome_info += point_mutual_information(p2.latent[k].variance, p2.noise_var[k]);
  }
  const auto& draws = nested_draws();
  double util = 0.0;
  PrefVector y1, y2;
  for (const auto& row : draws) {
    nested_outcomes(p1, p2, same_point, row, y1, y2);
    util += 0.5 * (model.expected_utility(y1) + model.expected_utility(y2));
  }
  s.expected_utility = util / static_cast<double>(draws.size());
  return s;
}

inline double nested_preference_info(const OutcomePrediction& p1, const OutcomePrediction& p2,
                                     const PreferenceModel& model, bool same_point) {
  const auto& draws = nested_draws();
  double pref = 0.0;
  PrefVector y1, y2;
  for (const auto& row : draws) {
    nested_outcomes(p1, p2, same_point, row, y1, y2);
    pref += preference_mi(model, y1, y2);
  }
  return pref / static_cast<double>(draws.size());
}

inline double nested_alpha(const NestedScore& s, double beta, double gamma) {
  return beta * s.outcome_info + gamma * s.preference_info + s.expected_utility;
}

}  // namespace detail

/// alpha = beta * I(f; y) + E_y[gamma * I(g_y; z) + E[g_y]] for the pair
/// (x1, x2); the utility term adds, as written for this acquisition.
/// Outcome dimensions and the two points are sampled independently, except
/// that a pair repeating one point shares its latent draw. gamma = 0 skips
/// the preference-information samples.
inline NestedScore nested_acquisition(const OutcomePrediction& p1, const OutcomePrediction& p2,
                                      const PreferenceModel& model, double beta, double gamma,
                                      bool same_point = false) {
  require(beta >= 0.0 && gamma >= 0.0, Errc::InvalidArgument, "beta and gamma must be >= 0");
  NestedScore s = detail::nested_base(p1, p2, model, same_point);
  if (gamma > 0.0) s.preference_info = detail::nested_preference_info(p1, p2, model, same_point);
  s.alpha = detail::nested_alpha(s, beta, gamma);
  return s;
}

struct PairChoice {
  std::size_t first = 0;
  std::size_t second = 0;
  NestedScore score;
};

/// Best pair (i <= j) over a candidate set by nested_acquisition, ties to the
/// lexicographically smallest pair. Exact: the preference term lies in
/// [0, ln 2], so a pair whose other terms plus gamma ln 2 fall short of the
/// running best is skipped without sampling it.
inline PairChoice select_pair(std::span<const OutcomePrediction> preds, const PreferenceModel& model, double beta,
                              double gamma) {
  require(!preds.empty(), Errc::EmptyCandidateSet, "no candidates");
  require(beta >= 0.0 && gamma >= 0.0, Errc::InvalidArgument, "beta and gamma must be >= 0");
  struct Pending {
    std::size_t i, j;
    NestedScore base;
    double bound;
  };
  std::vector<Pending> pairs;
  pairs.reserve(preds.size() * (preds.size() + 1) / 2);
  const double pref_cap = gamma * std::log(2.0);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::size_t j = i; j < preds.size(); ++j) {
      auto base = detail::nested_base(preds[i], preds[j], model, i == j);
      const double bound = detail::nested_alpha(base, beta, 0.0) + pref_cap;
      pairs.push_back({i, j, base, bound});
    }
  }
  // Most promising first so the running best rises quickly.
  std::vector<std::size_t> order(pairs.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pairs[a].bound > pairs[b].bound; });

  PairChoice best;
  std::size_t best_rank = pairs.size();  // position in (i, j) order
  for (std::size_t k : order) {
    auto& p = pairs[k];
    if (best_rank < pairs.size()) {
      const double slack = 1e-12 * (1.0 + std::abs(best.score.alpha));
      if (p.bound < best.score.alpha - slack) break;
    }
    NestedScore s = p.base;
    if (gamma > 0.0) s.preference_info = detail::nested_preference_info(preds[p.i], preds[p.j], model, p.i == p.j);
    s.alpha = detail::nested_alpha(s, beta, gamma);
    if (best_rank == pairs.size() || s.alpha > best.score.alpha || (s.alpha == best.score.alpha && k < best_rank)) {
      best = {p.i, p.j, s};
      best_rank = k;
    }
  }
  return best;
}

inline NestedScore nested_acquisition(std::span<const GaussianSurrogate> surrogates, const PreferenceModel& model,
                                      const Eigen::RowVectorXd& x1, const Eigen::RowVectorXd& x2, double beta,
                                      double gamma) {
  return nested_acquisition(predict_outcomes(surrogates, x1), predict_outcomes(surrogates, x2), model, beta, gamma,
                            x1 == x2);
}

}  // namespace efe
