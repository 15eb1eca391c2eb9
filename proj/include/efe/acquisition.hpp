#pragma once

// Expected-free-energy acquisition alpha(x) = beta * I(x) - E[h(y) | x],
// the sufficient-curiosity threshold and curiosity schedules.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "efe/belief.hpp"
#include "efe/error.hpp"
#include "efe/surrogate.hpp"

namespace efe {

struct AcquisitionScore {
  std::size_t candidate = 0;
  double info_gain = 0.0;
  double expected_energy = 0.0;
  double beta = 0.0;
  double alpha = 0.0;
};

/// Scores candidate i with info[i] and energy[i].
inline std::vector<AcquisitionScore> score_candidates(std::span<const double> info, std::span<const double> energy,
                                                      double beta) {
  require(!info.empty(), Errc::EmptyCandidateSet, "no candidates to score");
  require(info.size() == energy.size(), Errc::InvalidArgument, "info/energy length mismatch");
  require(beta >= 0.0, Errc::InvalidArgument, "beta must be >= 0");
  std::vector<AcquisitionScore> out(info.size());
  for (std::size_t i = 0; i < info.size(); ++i) {
    out[i] = {i, info[i], energy[i], beta, beta * info[i] - energy[i]};
  }
  return out;
}

/// Same, with per-candidate callables info(i) and energy(i).
template <class InfoFn, class EnergyFn>
std::vector<AcquisitionScore> score_candidates(std::size_t n, InfoFn&& info, EnergyFn&& energy, double beta) {
  require(n > 0, Errc::EmptyCandidateSet, "no candidates to score");
  std::vector<double> is(n), es(n);
  for (std::size_t i = 0; i < n; ++i) {
    is[i] = info(i);
    es[i] = energy(i);
  }
  return score_candidates(is, es, beta);
}

/// Argmax of alpha; ties go to the lowest candidate index.
inline std::size_t select(std::span<const AcquisitionScore> scores) {
  require(!scores.empty(), Errc::EmptyCandidateSet, "no scores to select from");
  const AcquisitionScore* best = &scores[0];
  for (const auto& s : scores) {
    if (s.alpha > best->alpha || (s.alpha == best->alpha && s.candidate < best->candidate)) best = &s;
  }
  return best->candidate;
}

struct CuriosityThreshold {
  double value = 0.0;
  std::size_t argmin = 0;
};

/// min over candidates with I > 0 of E[h] / I.
inline CuriosityThreshold curiosity_threshold(std::span<const double> info, std::span<const double> energy) {
  require(!info.empty(), Errc::EmptyCandidateSet, "no candidates");
  require(info.size() == energy.size(), Errc::InvalidArgument, "info/energy length mismatch");
  std::optional<CuriosityThreshold> best;
  for (std::size_t i = 0; i < info.size(); ++i) {
    if (!(info[i] > 0.0)) continue;
    const double r = energy[i] / info[i];
    if (!best || r < best->value) best = CuriosityThreshold{r, i};
  }
  if (!best) throw Error(Errc::NoInformativeAction, "every candidate has zero information gain");
  return *best;
}

inline CuriosityThreshold curiosity_threshold(std::span<const AcquisitionScore> scores) {
  std::vector<double> is, es;
  for (const auto& s : scores) {
    is.push_back(s.info_gain);
    es.push_back(s.expected_energy);
  }
  auto th = curiosity_threshold(is, es);
  th.argmin = scores[th.argmin].candidate;
  return th;
}

enum class ScheduleKind { Constant, Annealed, AdaptiveThreshold };

inline ScheduleKind parse_schedule_kind(const std::string& s) {
  if (s == "constant") return ScheduleKind::Constant;
  if (s == "annealed") return ScheduleKind::Annealed;
  if (s == "adaptive" || s == "adaptive-threshold") return ScheduleKind::AdaptiveThreshold;
  throw Error(Errc::ConfigValidation, "unknown curiosity kind '" + s + "' (constant|annealed|adaptive)");
}

inline std::string to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::Constant: return "constant";
    case ScheduleKind::Annealed: return "annealed";
    case ScheduleKind::AdaptiveThreshold: return "adaptive";
  }
  return "?";
}

struct CuriositySchedule {
  ScheduleKind kind = ScheduleKind::Constant;
  double beta0 = 2.0;
  double rate = 0.0;
  double margin = 1.5;

  static CuriositySchedule constant(double beta) { return {ScheduleKind::Constant, beta, 0.0, 1.5}; }

  void validate() const {
    require(beta0 >= 0.0 && std::isfinite(beta0), Errc::ConfigValidation, "curiosity beta0 must be >= 0");
    require(rate >= 0.0, Errc::ConfigValidation, "curiosity rate must be >= 0");
    require(margin >= 1.0, Errc::ConfigValidation, "curiosity margin must be >= 1");
  }

  bool needs_threshold() const { return kind == ScheduleKind::AdaptiveThreshold; }

  /// beta_t; the annealed kind is floored at the threshold when one is given.
  double beta_at(std::size_t t, std::optional<double> threshold = std::nullopt) const {
    require(t >= 1, Errc::InvalidArgument, "schedule time starts at 1");
    switch (kind) {
      case ScheduleKind::Constant:
        return beta0;
      case ScheduleKind::Annealed: {
        double b = beta0 * std::exp(-rate * static_cast<double>(t));
        if (threshold) b = std::max(b, *threshold);
        return std::max(0.0, b);
      }
      case ScheduleKind::AdaptiveThreshold:
        if (!threshold) throw Error(Errc::MissingThreshold, "adaptive curiosity needs the per-step threshold");
        return std::max(0.0, margin * *threshold);
    }
    return beta0;
  }
};

/// I(s; y | x) for every action of a discrete model.
inline std::vector<double> discrete_info_gains(const DiscreteBelief& belief, const DiscreteObservationModel& obs) {
  std::vector<double> out(obs.n_actions());
  for (std::size_t x = 0; x < out.size(); ++x) out[x] = discrete_mutual_information(belief, obs, x);
  return out;
}

}  // namespace efe
