#pragma once

// Seeded single-run loops for the four experiments.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "efe/acquisition.hpp"
#include "efe/belief.hpp"
#include "efe/diagnostics.hpp"
#include "efe/energy.hpp"
#include "efe/env/allocation.hpp"
#include "efe/env/bandit.hpp"
#include "efe/env/plume.hpp"
#include "efe/env/sandbox.hpp"
#include "efe/harness/config.hpp"
#include "efe/harness/csv.hpp"
#include "efe/preference.hpp"
#include "efe/rng.hpp"
#include "efe/surrogate.hpp"

namespace efe::harness {

struct RunLog {
  std::string experiment;
  std::uint64_t seed = 0;
  Table trace;
  json summary = json::object();
  std::optional<Table> comparisons;
};

inline const std::vector<std::string>& consistency_columns() {
  static const std::vector<std::string> c{"t",    "x",       "y",        "w",           "entropy",
                                          "info_gain_pred",   "info_gain_realized", "beta", "beta_threshold",
                                          "A_emp", "r_inst"};
  return c;
}

inline const std::vector<std::string>& regret_columns() {
  static const std::vector<std::string> c{"t",          "x",    "y",   "f_x",  "instant_regret", "cum_regret",
                                          "sigma_pred", "zeta_sqrt", "b_t", "B_t", "beta",          "bound_running"};
  return c;
}

inline const std::vector<std::string>& composite_columns() {
  static const std::vector<std::string> c{"t",          "x1",           "x2",           "y1_util",
                                          "y2_util",    "instant_regret", "cum_regret", "outcome_info",
                                          "preference_info", "expected_utility", "beta", "z", "p_choice"};
  return c;
}

/// Independent stream per (seed, purpose); the same seed drives every sweep
/// value so runs share random numbers.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(seed ^ mix(stream));
}

enum Stream : std::uint64_t { kEnvStream = 1, kPoolStream = 2, kDmStream = 3 };

inline CuriositySchedule schedule_from(const json& c) {
  CuriositySchedule s;
  s.kind = parse_schedule_kind(c["kind"]);
  s.beta0 = c["beta0"];
  s.rate = c["rate"];
  s.margin = c["margin"];
  s.validate();
  return s;
}

inline json nan_to_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ---------------------------------------------------------------------------
// Discrete consistency runs (sandbox, plume)

struct DiscreteTask {
  const DiscreteObservationModel* obs = nullptr;
  DiscreteBelief prior;
  std::size_t truth = 0;
  EnergySpec energy;
  std::function<double(std::size_t, Rng&)> observe;
};

inline RunLog run_discrete(const DiscreteTask& task, const CuriositySchedule& schedule, std::size_t horizon,
                           Rng& rng) {
  const auto& obs = *task.obs;
  const ConditionalEnergyTable table(task.energy, obs);
  RunLog log;
  log.trace.columns = consistency_columns();

  DiscreteBelief belief = task.prior;
  const double h0 = entropy(belief);
  double beta_prev = schedule.beta0;
  double beta_bar = 0.0;
  double a_lower = INFINITY;
  double sum_r = 0.0, sum_info_pred = 0.0, sum_info_real = 0.0;
  double w_min = INFINITY;
  std::size_t t_w_min = 0;
  std::size_t certified = 0, certificate_failures = 0;

  std::vector<double> energies(obs.n_actions());
  std::vector<double> column(obs.n_hypotheses());
  for (std::size_t t = 1; t <= horizon; ++t) {
    const double w_pre = error_mass(belief, task.truth);
    const auto info = discrete_info_gains(belief, obs);
    for (std::size_t x = 0; x < energies.size(); ++x) energies[x] = table.expected(belief, x);

    std::optional<double> threshold;
    try {
      threshold = curiosity_threshold(info, energies).value;
    } catch (const Error& e) {
      if (e.code() != Errc::NoInformativeAction) throw;
    }
    // Adaptive schedules keep the previous beta once no action is informative.
    const double beta = schedule.needs_threshold() && !threshold ? beta_prev : schedule.beta_at(t, threshold);
    beta_prev = beta;
    beta_bar = std::max(beta_bar, beta);

    const auto scores = score_candidates(info, energies, beta);
    const std::size_t x = select(scores);
    if (threshold && beta >= *threshold) {
      ++certified;
      if (scores[x].alpha < -1e-12) ++certificate_failures;
    }

    for (std::size_t s = 0; s < column.size(); ++s) column[s] = table(s, x);
    double a_emp = NAN;
    try {
      a_emp = observation_gap(column, belief, task.truth).weighted_average;
    } catch (const Error& e) {
      if (e.code() != Errc::DegenerateMass) throw;
    }
    if (w_pre > 0.01 && std::isfinite(a_emp)) a_lower = std::min(a_lower, a_emp);
    const double r_inst = instant_expected_regret(column, belief, task.truth);

    const double y = task.observe(x, rng);
    const double h_prev = entropy(belief);
    belief = bayes_update(belief, obs, x, y);
    const double h_next = entropy(belief);
    const double w = error_mass(belief, task.truth);

    sum_r += r_inst;
    sum_info_pred += info[x];
    sum_info_real += h_prev - h_next;
    if (w < w_min) {
      w_min = w;
      t_w_min = t;
    }
    log.trace.rows.push_back({static_cast<double>(t), static_cast<double>(x), y, w, h_next, info[x], h_prev - h_next,
                              beta, threshold.value_or(NAN), a_emp, r_inst});
  }

  const bool all_certified = certified == horizon;
  auto& s = log.summary;
  s["w_T"] = log.trace.rows.back()[3];
  s["w_min"] = w_min;
  s["t_w_min"] = t_w_min;
  s["H0"] = h0;
  s["H_T"] = entropy(belief);
  s["A_lower"] = nan_to_null(a_lower);
  s["beta_bar"] = beta_bar;
  s["sum_r"] = sum_r;
  s["sum_info_pred"] = sum_info_pred;
  s["sum_info_realized"] = sum_info_real;
  s["certified_steps"] = certified;
  s["certificate_failures"] = certificate_failures;
  s["chain_holds"] = all_certified ? json(sum_r <= beta_bar * sum_info_pred + 1e-6) : json(nullptr);
  s["mode"] = belief.mode();
  s["mode_id"] = belief.ids()[belief.mode()];
  s["true_id"] = belief.ids()[task.truth];
  return log;
}

inline RunLog run_sandbox(const json& cfg, std::uint64_t seed) {
  const auto& env = cfg["environment"];
  const auto spec = env::SandboxSpec::standard(env["obs_std"].get<double>());
  const auto obs = spec.model();
  const std::size_t truth = env["true_state"];
  DiscreteTask task{&obs,
                    env["prior_true_mass"].is_null()
                        ? DiscreteBelief::uniform(spec.state_ids())
                        : DiscreteBelief::concentrated(spec.state_ids(), truth, env["prior_true_mass"].get<double>()),
                    truth,
                    QuadraticEnergy{cfg["energy"]["a"], cfg["energy"]["c"]},
                    [&](std::size_t x, Rng& r) { return env::sandbox_observe(spec, truth, x, r); }};
  Rng rng(stream_seed(seed, kEnvStream));
  auto log = run_discrete(task, schedule_from(cfg["curiosity"]), cfg["horizon"], rng);
  log.experiment = "sandbox";
  log.seed = seed;
  return log;
}

struct PlumeSetup {
  std::vector<env::PlumeHypothesis> hypotheses;
  std::vector<env::Vec2> sensors;
  DiscreteObservationModel obs;
};

/// Observation models are cached per (task, sensor grid, dt).
inline std::shared_ptr<const PlumeSetup> plume_setup(env::PlumeTask task, std::size_t side, double dt) {
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const PlumeSetup>> cache;
  const std::string key = env::to_string(task) + "/" + std::to_string(side) + "/" + format_number(dt);
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  auto hyps = env::build_hypothesis_grid(task);
  auto sensors = env::sensor_grid(side);
  auto obs = env::plume_model(hyps, sensors, dt);
  auto p = std::make_shared<const PlumeSetup>(PlumeSetup{std::move(hyps), std::move(sensors), std::move(obs)});
  cache.emplace(key, p);
  return p;
}

inline RunLog run_plume(const json& cfg, std::uint64_t seed) {
  const auto& env = cfg["environment"];
  const auto task_kind = env::parse_plume_task(env["task"]);
  const double dt = env["dt"];
  const auto setup = plume_setup(task_kind, env["sensors_per_side"], dt);
  const std::size_t truth = env::true_hypothesis_index(task_kind);
  const double y_max =
      cfg["energy"]["y_max"].is_null() ? env::saturation_threshold(task_kind) : cfg["energy"]["y_max"].get<double>();
  const auto& truth_sources = setup->hypotheses[truth].sources;
  DiscreteTask task{&setup->obs, DiscreteBelief::uniform(env::hypothesis_ids(setup->hypotheses)), truth,
                    SaturationEnergy{y_max}, [&](std::size_t x, Rng& r) {
                      return static_cast<double>(env::plume_observe(truth_sources, setup->sensors[x], dt, r));
                    }};
  Rng rng(stream_seed(seed, kEnvStream));
  auto log = run_discrete(task, schedule_from(cfg["curiosity"]), cfg["horizon"], rng);
  log.experiment = "plume";
  log.seed = seed;
  const std::size_t mode = log.summary["mode"];
  const auto& ms = setup->hypotheses[mode].sources.front();
  const auto& ts = truth_sources.front();
  if (task_kind == env::PlumeTask::Localization) log.summary["mode_distance"] = env::norm(ms.theta - ts.theta);
  if (task_kind == env::PlumeTask::Wind) log.summary["mode_distance"] = env::norm(ms.wind - ts.wind);
  return log;
}

// ---------------------------------------------------------------------------
// GP bandit regret runs

inline BiasSchedule bias_schedule_from(const json& e) {
  const std::string name = e["schedule"];
  const double b = e["amplitude"];
  if (name == "aligned") return BiasSchedule::aligned();
  if (name == "constant") return BiasSchedule::constant(b);
  if (name == "slow") return BiasSchedule::exponential(b, 0.02);
  if (name == "fast") return BiasSchedule::exponential(b, 0.25);
  return BiasSchedule::exponential(b, e["rate"].get<double>());
}

/// Cumulative greedy information gain for 1..horizon points, cached per grid.
inline std::vector<double> greedy_gain_prefix(const KernelSpec& kernel, std::span<const double> grid,
                                              double noise_var, std::size_t horizon) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = grid[static_cast<std::size_t>(i)] - grid[static_cast<std::size_t>(j)];
      cov(i, j) = kernel.output_scale * std::exp(-0.5 * d * d / (kernel.lengthscale * kernel.lengthscale));
    }
  }
  std::vector<double> prefix(horizon + 1, 0.0);
  for (std::size_t t = 1; t <= horizon; ++t) {
    Eigen::Index best = 0;
    cov.diagonal().maxCoeff(&best);
    const double var = std::max(0.0, cov(best, best));
    prefix[t] = prefix[t - 1] + point_mutual_information(var, noise_var);
    const Eigen::VectorXd col = cov.col(best);
    cov.noalias() -= col * col.transpose() / (var + noise_var);
  }
  return prefix;
}

inline RunLog run_bandit(const json& cfg, std::uint64_t seed) {
  const auto& env = cfg["environment"];
  env::BanditSpec spec;
  spec.n_grid = env["n_grid"];
  spec.noise_sd = env["noise_sd"];
  const KernelSpec kernel(env["lengthscale"].get<double>(), env["output_scale"].get<double>());
  const double noise_var = spec.noise_sd * spec.noise_sd;
  const double delta = env["delta"];
  const std::size_t horizon = cfg["horizon"];
  const auto grid = spec.grid();
  const double y_star = spec.y_star();
  const BiasSchedule bias = bias_schedule_from(cfg["energy"]);
  const auto schedule = schedule_from(cfg["curiosity"]);

  std::vector<double> f_grid(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) f_grid[i] = env::BanditSpec::f(grid[i]);
  const double lipschitz = lipschitz_estimate(f_grid, [&](double y) { return std::abs(y - y_star); });
  const auto rho = greedy_gain_prefix(kernel, grid, noise_var, horizon);
  Eigen::MatrixXd grid_mat(static_cast<Eigen::Index>(grid.size()), 1);
  for (std::size_t i = 0; i < grid.size(); ++i) grid_mat(static_cast<Eigen::Index>(i), 0) = grid[i];

  Rng rng(stream_seed(seed, kEnvStream));
  RunLog log;
  log.experiment = "gp-bandit";
  log.seed = seed;
  log.trace.columns = regret_columns();
  std::vector<double> xs, ys;
  std::vector<double> info(grid.size()), energy(grid.size());
  double cum = 0.0, beta_bar = 0.0, sum_b = 0.0, beta_prev = schedule.beta0;
  double y_lo = INFINITY, y_hi = -INFINITY;
  std::size_t certified = 0, certificate_failures = 0, negative_energy = 0;
  for (std::size_t t = 1; t <= horizon; ++t) {
    const auto gp = GaussianSurrogate::fit_1d(xs, ys, kernel, noise_var);
    const auto preds = gp.predict_many(grid_mat);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      info[i] = point_mutual_information(preds[i].variance, noise_var);
      energy[i] = expected_biased_regret({preds[i].mean, preds[i].variance + noise_var}, y_star, bias,
                                         static_cast<double>(t));
      if (energy[i] < 0.0) ++negative_energy;
    }
    std::optional<double> threshold;
    try {
      threshold = curiosity_threshold(info, energy).value;
    } catch (const Error& e) {
      if (e.code() != Errc::NoInformativeAction) throw;
    }
    const double beta = schedule.needs_threshold() && !threshold ? beta_prev : schedule.beta_at(t, threshold);
    beta_prev = beta;
    beta_bar = std::max(beta_bar, beta);
    const auto scores = score_candidates(info, energy, beta);
    const std::size_t i = select(scores);
    if (threshold && beta >= *threshold) {
      ++certified;
      if (scores[i].alpha < -1e-12) ++certificate_failures;
    }

    const double x = grid[i];
    const double y = env::bandit_observe(spec, x, rng);
    const double f_x = env::BanditSpec::f(x);
    const double r = y_star - f_x;
    cum += r;
    y_lo = std::min(y_lo, y);
    y_hi = std::max(y_hi, y);
    const double b_t = bias.at(static_cast<double>(t));
    const double big_b = std::abs(b_t) * (y_hi - y_lo);
    sum_b += big_b;
    const double zeta_sqrt = confidence_width(t, delta);
    const double bound = regret_bound({beta_bar, rho[t], lipschitz, zeta_sqrt, t, noise_var, sum_b});
    log.trace.rows.push_back({static_cast<double>(t), x, y, f_x, r, cum, preds[i].sd(), zeta_sqrt, b_t, big_b, beta,
                              bound});
    xs.push_back(x);
    ys.push_back(y);
  }
  auto& s = log.summary;
  s["R_T"] = cum;
  s["bound_T"] = log.trace.rows.back().back();
  s["bound_holds"] = cum <= log.trace.rows.back().back();
  s["rho_T"] = rho[horizon];
  s["beta_bar"] = beta_bar;
  s["lipschitz"] = lipschitz;
  s["sum_B"] = sum_b;
  s["y_star"] = y_star;
  s["certified_steps"] = certified;
  s["certificate_failures"] = certificate_failures;
  s["negative_energy_evaluations"] = negative_energy;
  return log;
}

// ---------------------------------------------------------------------------
// Composite BO with preference learning

inline PrefVector pref_vector(const json& arr) {
  PrefVector v;
  for (int k = 0; k < 4; ++k) v(k) = arr[static_cast<std::size_t>(k)].get<double>();
  return v;
}

inline RunLog run_composite(const json& cfg, std::uint64_t seed) {
  const auto& env = cfg["environment"];
  const auto& en = cfg["energy"];
  const auto map = env::AllocationMap::generate(env["map_seed"].get<std::uint64_t>());
  const std::size_t pool_size = env["pool_size"];
  const double noise_sd = env["noise_sd"];
  const double noise_var = noise_sd * noise_sd;
  const double lambda = env["dm_lambda"];
  const KernelSpec kernel(env["lengthscale"].get<double>(), 1.0);
  const PrefVector a = pref_vector(env["true_weights"]);
  const std::string heuristic = en["heuristic"];
  const double gamma = heuristic == "learned" ? en["gamma"].get<double>() : 0.0;
  const auto schedule = schedule_from(cfg["curiosity"]);
  const std::size_t horizon = cfg["horizon"];

  Rng pool_rng(stream_seed(seed, kPoolStream));
  Eigen::MatrixXd pool(static_cast<Eigen::Index>(pool_size), static_cast<Eigen::Index>(env::kAllocationInputDim));
  for (Eigen::Index i = 0; i < pool.rows(); ++i) {
    for (Eigen::Index j = 0; j < pool.cols(); ++j) pool(i, j) = pool_rng.uniform();
  }
  std::vector<double> g_true(pool_size);
  for (std::size_t i = 0; i < pool_size; ++i) {
    g_true[i] = a.dot(map.evaluate(pool.row(static_cast<Eigen::Index>(i)).transpose()));
  }
  const double g_max = *std::max_element(g_true.begin(), g_true.end());
  const double g_min = *std::min_element(g_true.begin(), g_true.end());

  PreferenceModel model = heuristic == "learned"         ? PreferenceModel::prior(env["prior_var"], lambda)
                          : heuristic == "constant-bias" ? PreferenceModel::fixed(pref_vector(en["bias_weights"]), lambda)
                                                         : PreferenceModel::fixed(a, lambda);

  Rng rng(stream_seed(seed, kEnvStream));
  Rng dm_rng(stream_seed(seed, kDmStream));
  RunLog log;
  log.experiment = "composite";
  log.seed = seed;
  log.trace.columns = composite_columns();
  Table comparisons;
  comparisons.columns = {"t", "y1_0", "y1_1", "y1_2", "y1_3", "y2_0", "y2_1", "y2_2", "y2_3", "z", "p"};

  std::vector<Eigen::RowVectorXd> inputs;
  std::vector<env::Outcome4> outputs;
  double cum = 0.0;
  double r20 = NAN;
  std::vector<OutcomePrediction> preds(pool_size);
  for (std::size_t t = 1; t <= horizon; ++t) {
    const double beta = schedule.needs_threshold() ? schedule.beta0 : schedule.beta_at(t);
    std::vector<GaussianSurrogate> gps;
    Eigen::MatrixXd in(static_cast<Eigen::Index>(inputs.size()), pool.cols());
    for (std::size_t n = 0; n < inputs.size(); ++n) in.row(static_cast<Eigen::Index>(n)) = inputs[n];
    for (int k = 0; k < 4; ++k) {
      Eigen::VectorXd out(static_cast<Eigen::Index>(outputs.size()));
      for (std::size_t n = 0; n < outputs.size(); ++n) out(static_cast<Eigen::Index>(n)) = outputs[n](k);
      gps.push_back(GaussianSurrogate::fit(in, out, kernel, noise_var));
    }
    for (int k = 0; k < 4; ++k) {
      const auto p = gps[static_cast<std::size_t>(k)].predict_many(pool);
      for (std::size_t i = 0; i < pool_size; ++i) {
        preds[i].latent[static_cast<std::size_t>(k)] = p[i];
        preds[i].noise_var[static_cast<std::size_t>(k)] = noise_var;
      }
    }
    const PairChoice choice = select_pair(preds, model, beta, gamma);
    const std::size_t bi = choice.first, bj = choice.second;
    const NestedScore& best = choice.score;
    const Eigen::VectorXd x1 = pool.row(static_cast<Eigen::Index>(bi)).transpose();
    const Eigen::VectorXd x2 = pool.row(static_cast<Eigen::Index>(bj)).transpose();
    const env::Outcome4 y1 = env::allocation_observe(map, x1, noise_sd, rng);
    const env::Outcome4 y2 = env::allocation_observe(map, x2, noise_sd, rng);
    inputs.push_back(x1.transpose());
    outputs.push_back(y1);
    inputs.push_back(x2.transpose());
    outputs.push_back(y2);

    const double r = g_max - 0.5 * (g_true[bi] + g_true[bj]);
    cum += r;
    if (t == 20) r20 = cum;
    const int z = simulate_dm(y1, y2, a, lambda, dm_rng);
    const double p = probit_likelihood(a.dot(y1), a.dot(y2), lambda);
    if (heuristic == "learned") model = laplace_update(model, {y1, y2, z});

    log.trace.rows.push_back({static_cast<double>(t), static_cast<double>(bi), static_cast<double>(bj), a.dot(y1),
                              a.dot(y2), r, cum, best.outcome_info, best.preference_info, best.expected_utility, beta,
                              static_cast<double>(z), p});
    comparisons.rows.push_back({static_cast<double>(t), y1(0), y1(1), y1(2), y1(3), y2(0), y2(1), y2(2), y2(3),
                                static_cast<double>(z), p});
  }
  const std::size_t tail = std::min<std::size_t>(20, horizon);
  double tail_mean = 0.0;
  for (std::size_t k = horizon - tail; k < horizon; ++k) tail_mean += log.trace.rows[k][5];
  tail_mean /= static_cast<double>(tail);
  auto& s = log.summary;
  s["R_T"] = cum;
  s["R_20"] = nan_to_null(r20);
  s["tail_regret"] = tail_mean;
  s["utility_range"] = g_max - g_min;
  s["converged"] = tail_mean <= 0.05 * (g_max - g_min);
  s["g_max"] = g_max;
  const double cosang = model.mean.norm() > 0 ? model.mean.dot(a) / (model.mean.norm() * a.norm()) : NAN;
  s["weight_angle_deg"] = nan_to_null(std::acos(std::clamp(cosang, -1.0, 1.0)) * 180.0 / std::numbers::pi);
  log.comparisons = std::move(comparisons);
  return log;
}

/// Runs one (normalized, sweep-applied) config for one seed.
inline RunLog run_single(const json& cfg, std::uint64_t seed) {
  const std::string exp = cfg["experiment"];
  if (exp == "sandbox") return run_sandbox(cfg, seed);
  if (exp == "gp-bandit") return run_bandit(cfg, seed);
  if (exp == "plume") return run_plume(cfg, seed);
  return run_composite(cfg, seed);
}

}  // namespace efe::harness
