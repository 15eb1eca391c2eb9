#pragma once

// Command-line front end: run, sweep, summarize, validate.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "efe/harness/config.hpp"
#include "efe/harness/experiment.hpp"

namespace efe::harness {

inline constexpr const char* kConfigHelp = R"(Config fields (TOML, or JSON with a .json extension):
  experiment        sandbox | gp-bandit | plume | composite
  horizon           steps per run (default 150 sandbox, 100 otherwise)
  seeds             list of integer seeds (default [0,1,2,3,4])
  output            output directory (default "results")
  [environment]
    sandbox:   obs_std=0.2, true_state=2 (0-based), prior_true_mass (omit for uniform)
    gp-bandit: n_grid=200, noise_sd=0.05, lengthscale=0.08, output_scale=1.0, delta=0.05
    plume:     task=localization|wind|active-set, sensors_per_side=20, dt=1.0
    composite: map_seed=7, pool_size=16, noise_sd=0.02, lengthscale=2.0, dm_lambda=0.1,
               true_weights=[1,-1,2,1], prior_var=25.0
  [energy]
    quadratic (sandbox):      a=0.25 in [0.15,0.35], c=0.0
    saturation (plume):       y_max (omit for the task default: 60, or 30 for active-set)
    biased-regret (bandit):   schedule=aligned|constant|slow|fast|exponential, amplitude=2.0, rate=0.0
    preference-efe (composite): heuristic=learned|constant-bias|true, gamma=1.0, bias_weights=[1,-1,10,1]
  [curiosity]
    kind=constant|annealed|adaptive, beta0 (2.0 sandbox, 1.0 otherwise), rate=0.0, margin=1.5
  [sweep]
    axis="<section>.<field>", values=[...]   (exactly one axis)
)";

inline std::vector<json> parse_values_csv(const std::string& text) {
  std::vector<json> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto b = tok.find_first_not_of(' ');
    const auto e = tok.find_last_not_of(' ');
    tok = b == std::string::npos ? "" : tok.substr(b, e - b + 1);
    if (tok.empty()) config_error("--values", "empty entry");
    try {
      std::size_t pos = 0;
      const double v = std::stod(tok, &pos);
      if (pos == tok.size()) {
        out.emplace_back(v);
        continue;
      }
    } catch (const std::exception&) {
    }
    out.emplace_back(tok);
  }
  if (out.empty()) config_error("--values", "no values given");
  return out;
}

inline int cli_main(int argc, char** argv) {
  CLI::App app{"Expected-free-energy acquisition experiments"};
  app.footer(kConfigHelp);
  app.require_subcommand(1);

  std::string config_path, out_dir, axis, values, summarize_dir_arg;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_seeds, horizon;

  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "Config file (.toml or .json)")->required();
    sub->add_option("--seed", seed, "Run a single seed");
    sub->add_option("--seeds", n_seeds, "Run seeds 0..N-1")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--horizon", horizon, "Override the horizon")->check(CLI::PositiveNumber);
  };
  auto* run = app.add_subcommand("run", "Run a config (and its sweep) over all seeds");
  add_run_flags(run);
  auto* sweep = app.add_subcommand("sweep", "Run a config over one axis given on the command line");
  add_run_flags(sweep);
  sweep->add_option("--axis", axis, "Dotted field path, e.g. curiosity.beta0")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();
  auto* summarize = app.add_subcommand("summarize", "Rebuild summary.csv and summary.json from run logs");
  summarize->add_option("dir", summarize_dir_arg, "Directory of run logs")->required();
  auto* validate = app.add_subcommand("validate", "Check a config and print its normalized form");
  validate->add_option("config", config_path, "Config file (.toml or .json)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (summarize->parsed()) {
      summarize_dir(summarize_dir_arg);
      std::cout << "wrote " << (fs::path(summarize_dir_arg) / "summary.csv").string() << "\n";
      return 0;
    }
    json raw = load_config_file(config_path);
    if (sweep->parsed()) {
      json s = {{"axis", axis}, {"values", parse_values_csv(values)}};
      raw["sweep"] = s;
    }
    RunOptions opt;
    if (seed) opt.seeds = std::vector<std::uint64_t>{*seed};
    if (n_seeds) {
      std::vector<std::uint64_t> s;
      for (std::uint64_t i = 0; i < *n_seeds; ++i) s.push_back(i);
      opt.seeds = s;
    }
    opt.horizon = horizon;
    const json cfg = normalize_config(apply_overrides(raw, opt));
    const auto points = expand_sweep(cfg);
    if (validate->parsed()) {
      std::cout << cfg.dump(2) << "\n";
      std::cout << "ok: " << points.size() << " sweep value(s) x " << cfg["seeds"].size() << " seed(s)\n";
      return 0;
    }
    const fs::path dir = out_dir.empty() ? fs::path(cfg["output"].get<std::string>()) : fs::path(out_dir);
    const json summary = run_experiment(cfg, dir);
    std::cout << "wrote " << points.size() * cfg["seeds"].size() << " run(s) and summary to " << dir.string()
              << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == Errc::ConfigValidation ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace efe::harness
