#pragma once

// Chemical plume field: hit rates, Poisson sensing and the three
// identification tasks over discrete hypothesis grids.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "efe/belief.hpp"
#include "efe/error.hpp"
#include "efe/rng.hpp"

namespace efe::env {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }

struct PlumeSource {
  Vec2 theta;
  double release_rate = 100.0;  // R_s
  double gamma = 50.0;          // mean travel distance
  Vec2 wind;
  double diffusivity = 10.0;
  bool active = true;

  void validate() const {
    require(release_rate > 0.0 && gamma > 0.0 && diffusivity > 0.0, Errc::InvalidArgument,
            "plume source needs R_s, gamma, D > 0");
  }
};

/// The eight reference sources (index 0 is source 1).
inline const std::array<PlumeSource, 8>& reference_sources() {
  static const std::array<PlumeSource, 8> table{{
      {{20.0, 20.0}, 100.0, 50.0, {0.5, 0.5}, 10.0, true},
      {{30.0, 80.0}, 100.0, 60.0, {-0.3, 0.2}, 15.0, true},
      {{45.0, 55.0}, 15.0, 50.0, {0.5, 0.5}, 10.0, true},
      {{50.0, 50.0}, 18.0, 30.0, {-0.3, 0.2}, 15.0, true},
      {{55.0, 45.0}, 16.0, 40.0, {0.2, -0.4}, 12.0, true},
      {{48.0, 52.0}, 17.0, 35.0, {0.1, 0.1}, 11.0, true},
      {{52.0, 55.0}, 14.0, 45.0, {-0.1, -0.1}, 13.0, true},
      {{52.0, 52.0}, 18.0, 40.0, {0.1, -0.1}, 13.0, true},
  }};
  return table;
}

inline constexpr double kSensorSize = 1.0;
inline constexpr double kMeasurementTime = 1.0;
inline constexpr double kDistanceClamp = 1e-6;

/// Modified Bessel function of the second kind, order zero.
inline double bessel_k0(double x) {
  require(x > 0.0, Errc::InvalidArgument, "K0 needs x > 0");
  return std::cyl_bessel_k(0.0, x);
}

/// R_s / ln(gamma/a) * exp(-<theta - x, V> / 2D) * K0(|theta - x| / gamma).
inline double plume_rate(const PlumeSource& src, Vec2 x, double sensor_size = kSensorSize) {
  src.validate();
  if (!(src.gamma > sensor_size)) {
    throw Error(Errc::InvalidGeometry, "plume rate needs gamma > sensor size");
  }
  const Vec2 d = src.theta - x;
  const double dist = std::max(norm(d), kDistanceClamp);
  return src.release_rate / std::log(src.gamma / sensor_size) * std::exp(-dot(d, src.wind) / (2.0 * src.diffusivity)) *
         bessel_k0(dist / src.gamma);
}

/// Sum of active-source rates times dt.
inline double plume_expected_count(std::span<const PlumeSource> sources, Vec2 x, double dt = kMeasurementTime) {
  require(dt > 0.0, Errc::InvalidArgument, "measurement time must be > 0");
  double lambda = 0.0;
  for (const auto& s : sources) {
    if (s.active) lambda += plume_rate(s, x) * dt;
  }
  return lambda;
}

inline std::int64_t plume_observe(std::span<const PlumeSource> sources, Vec2 x, double dt, Rng& rng) {
  return rng.poisson(plume_expected_count(sources, x, dt));
}

enum class PlumeTask { Localization, Wind, ActiveSet };

inline PlumeTask parse_plume_task(const std::string& s) {
  if (s == "localization") return PlumeTask::Localization;
  if (s == "wind") return PlumeTask::Wind;
  if (s == "active-set") return PlumeTask::ActiveSet;
  throw Error(Errc::ConfigValidation, "unknown plume task '" + s + "' (localization|wind|active-set)");
}

inline std::string to_string(PlumeTask t) {
  switch (t) {
    case PlumeTask::Localization: return "localization";
    case PlumeTask::Wind: return "wind";
    case PlumeTask::ActiveSet: return "active-set";
  }
  return "?";
}

struct PlumeHypothesis {
  std::string id;
  std::vector<PlumeSource> sources;
};

inline constexpr std::size_t kLatticeSide = 20;

/// Localization: source 1 moved over {0, 5, ..., 95}^2.
/// Wind: source 2 with V over {-1.0, -0.9, ..., 0.9}^2.
/// Active set: every on/off pattern of sources 3..8, bit i for source i + 3.
inline std::vector<PlumeHypothesis> build_hypothesis_grid(PlumeTask task) {
  const auto& ref = reference_sources();
  std::vector<PlumeHypothesis> out;
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return std::string(buf);
  };
  switch (task) {
    case PlumeTask::Localization:
      for (std::size_t i = 0; i < kLatticeSide; ++i) {
        for (std::size_t j = 0; j < kLatticeSide; ++j) {
          PlumeSource s = ref[0];
          s.theta = {5.0 * static_cast<double>(i), 5.0 * static_cast<double>(j)};
          out.push_back({"theta=" + fmt(s.theta.x) + "," + fmt(s.theta.y), {s}});
        }
      }
      break;
    case PlumeTask::Wind:
      for (std::size_t i = 0; i < kLatticeSide; ++i) {
        for (std::size_t j = 0; j < kLatticeSide; ++j) {
          PlumeSource s = ref[1];
          s.wind = {(static_cast<double>(i) - 10.0) / 10.0, (static_cast<double>(j) - 10.0) / 10.0};
          out.push_back({"V=" + fmt(s.wind.x) + "," + fmt(s.wind.y), {s}});
        }
      }
      break;
    case PlumeTask::ActiveSet:
      for (unsigned mask = 0; mask < 64; ++mask) {
        PlumeHypothesis h;
        for (unsigned b = 0; b < 6; ++b) {
          PlumeSource s = ref[b + 2];
          s.active = (mask >> b) & 1U;
          h.sources.push_back(s);
          h.id += s.active ? '1' : '0';
        }
        out.push_back(std::move(h));
      }
      break;
  }
  return out;
}

/// Ground truth of each task as an index into build_hypothesis_grid(task).
inline std::size_t true_hypothesis_index(PlumeTask task) {
  switch (task) {
    case PlumeTask::Localization: return 4 * kLatticeSide + 4;   // theta = [20, 20]
    case PlumeTask::Wind: return 7 * kLatticeSide + 12;          // V = [-0.3, 0.2]
    case PlumeTask::ActiveSet: return 0b101101;                  // sources 3, 5, 6, 8
  }
  return 0;
}

inline double saturation_threshold(PlumeTask task) { return task == PlumeTask::ActiveSet ? 30.0 : 60.0; }

/// Cell centres of a side x side grid over [0, 100]^2 (side 20: 2.5, 7.5, ..., 97.5).
inline std::vector<Vec2> sensor_grid(std::size_t side = 20) {
  std::vector<Vec2> out;
  const double step = 100.0 / static_cast<double>(side);
  for (std::size_t i = 0; i < side; ++i) {
    for (std::size_t j = 0; j < side; ++j) {
      out.push_back({step * (static_cast<double>(i) + 0.5), step * (static_cast<double>(j) + 0.5)});
    }
  }
  return out;
}

/// Poisson observation model over (hypothesis, sensor location).
inline DiscreteObservationModel plume_model(std::span<const PlumeHypothesis> hyps, std::span<const Vec2> sensors,
                                            double dt = kMeasurementTime) {
  std::vector<double> lambda(hyps.size() * sensors.size());
  for (std::size_t s = 0; s < hyps.size(); ++s) {
    for (std::size_t x = 0; x < sensors.size(); ++x) {
      lambda[s * sensors.size() + x] = plume_expected_count(hyps[s].sources, sensors[x], dt);
    }
  }
  return DiscreteObservationModel::poisson(hyps.size(), sensors.size(), std::move(lambda));
}

inline std::vector<std::string> hypothesis_ids(std::span<const PlumeHypothesis> hyps) {
  std::vector<std::string> ids;
  for (const auto& h : hyps) ids.push_back(h.id);
  return ids;
}

}  // namespace efe::env
