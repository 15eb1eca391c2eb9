#pragma once

// Sweep execution, per-run files and the seed-aggregated summary.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "efe/harness/config.hpp"
#include "efe/harness/csv.hpp"
#include "efe/harness/runners.hpp"

namespace efe::harness {

namespace fs = std::filesystem;

inline std::string value_label(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return format_number(v.get<double>());
  return v.dump();
}

inline std::string axis_leaf(const std::string& axis) {
  const auto pos = axis.rfind('.');
  return pos == std::string::npos ? axis : axis.substr(pos + 1);
}

/// "<experiment>[_<field>=<value>]_seed<k>"
inline std::string run_stem(const std::string& experiment, const std::string& axis, const json& value,
                            std::uint64_t seed) {
  std::string stem = experiment;
  if (!axis.empty()) stem += "_" + axis_leaf(axis) + "=" + value_label(value);
  return stem + "_seed" + std::to_string(seed);
}

struct RunRecord {
  std::string stem;
  json meta;  // sidecar contents
};

inline RunRecord write_run(const fs::path& dir, const RunLog& log, const json& run_config, const std::string& axis,
                           const json& value) {
  RunRecord rec;
  rec.stem = run_stem(log.experiment, axis, value, log.seed);
  write_text(dir / (rec.stem + ".csv"), to_csv(log.trace));
  if (log.comparisons) write_text(dir / (rec.stem + ".comparisons.csv"), to_csv(*log.comparisons));
  rec.meta = {{"experiment", log.experiment},
              {"seed", log.seed},
              {"sweep_axis", axis.empty() ? json(nullptr) : json(axis)},
              {"sweep_value", value},
              {"config_hash", config_hash(run_config)},
              {"base_hash", base_hash(run_config, axis)},
              {"horizon", run_config["horizon"]},
              {"csv", rec.stem + ".csv"},
              {"config", run_config},
              {"summary", log.summary}};
  write_text(dir / (rec.stem + ".json"), rec.meta.dump(2) + "\n");
  return rec;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over seeds
};

inline MeanStd mean_std(const std::vector<double>& v) {
  MeanStd m;
  if (v.empty()) return {NAN, NAN};
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.std = std::sqrt(ss / static_cast<double>(v.size()));
  return m;
}

inline json stat_json(const MeanStd& m) {
  return {{"mean", nan_to_null(m.mean)}, {"std", nan_to_null(m.std)}, {"band", nan_to_null(0.2 * m.std)}};
}

// Numbers sort before strings; within a kind, natural order.
inline bool value_less(const json& a, const json& b) {
  if (a.is_null() || b.is_null()) return a.is_null() && !b.is_null();
  if (a.is_number() && b.is_number()) return a.get<double>() < b.get<double>();
  if (a.is_number() != b.is_number()) return a.is_number();
  return a.dump() < b.dump();
}

/// Reads every run sidecar in `dir` and writes summary.csv (per-step mean,
/// std and 0.2 std band over seeds for each sweep value) and summary.json.
inline json summarize_dir(const fs::path& dir) {
  std::vector<fs::path> sidecars;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto& p = e.path();
    if (p.extension() == ".json" && p.filename() != "summary.json") sidecars.push_back(p);
  }
  std::sort(sidecars.begin(), sidecars.end());
  if (sidecars.empty()) throw Error(Errc::InvalidArgument, "no run logs in '" + dir.string() + "'");

  struct Group {
    json value;
    std::string config_hash;
    std::vector<std::uint64_t> seeds;
    std::vector<Table> tables;
    std::vector<json> summaries;
  };
  std::vector<Group> groups;
  std::string base, experiment;
  json axis;
  for (const auto& p : sidecars) {
    json meta;
    try {
      meta = json::parse(read_text(p));
    } catch (const json::parse_error&) {
      throw Error(Errc::InvalidArgument, "unreadable run sidecar '" + p.string() + "'");
    }
    if (!meta.contains("base_hash") || !meta.contains("csv")) continue;
    if (base.empty()) {
      base = meta["base_hash"];
      experiment = meta["experiment"];
      axis = meta["sweep_axis"];
    } else if (meta["base_hash"] != base || meta["sweep_axis"] != axis) {
      throw Error(Errc::MixedConfigs, "'" + p.filename().string() + "' comes from a different configuration");
    }
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) { return g.value == meta["sweep_value"]; });
    if (it == groups.end()) {
      groups.push_back({meta["sweep_value"], meta["config_hash"], {}, {}, {}});
      it = std::prev(groups.end());
    } else if (it->config_hash != meta["config_hash"]) {
      throw Error(Errc::MixedConfigs, "runs for sweep value " + meta["sweep_value"].dump() + " disagree on config");
    }
    it->seeds.push_back(meta["seed"]);
    it->tables.push_back(parse_csv(read_text(dir / meta["csv"].get<std::string>())));
    it->summaries.push_back(meta["summary"]);
  }
  if (groups.empty()) throw Error(Errc::InvalidArgument, "no run logs in '" + dir.string() + "'");
  std::sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) { return value_less(a.value, b.value); });

  const auto& columns = groups.front().tables.front().columns;
  std::string csv = "value,t";
  for (std::size_t c = 1; c < columns.size(); ++c) {
    csv += "," + columns[c] + "_mean," + columns[c] + "_std," + columns[c] + "_band";
  }
  csv += '\n';

  json out = {{"experiment", experiment}, {"base_hash", base}, {"sweep_axis", axis}, {"groups", json::array()}};
  for (auto& g : groups) {
    // Seeds in ascending order so results do not depend on file order.
    std::vector<std::size_t> order(g.seeds.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return g.seeds[a] < g.seeds[b]; });

    std::size_t steps = g.tables.front().rows.size();
    for (const auto& t : g.tables) {
      if (t.columns != columns) throw Error(Errc::MixedConfigs, "run logs have different columns");
      steps = std::min(steps, t.rows.size());
    }
    json terminal = json::object();
    for (std::size_t r = 0; r < steps; ++r) {
      csv += value_label(g.value) + "," + format_number(g.tables.front().rows[r][0]);
      for (std::size_t c = 1; c < columns.size(); ++c) {
        std::vector<double> v;
        for (std::size_t i : order) v.push_back(g.tables[i].rows[r][c]);
        const auto m = mean_std(v);
        csv += "," + format_number(m.mean) + "," + format_number(m.std) + "," + format_number(0.2 * m.std);
        if (r + 1 == steps) terminal[columns[c]] = stat_json(m);
      }
      csv += '\n';
    }

    json run_stats = json::object();
    json rates = json::object();
    std::vector<std::string> keys;
    for (const auto& sm : g.summaries) {
      for (const auto& [key, v] : sm.items()) {
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
      }
    }
    std::sort(keys.begin(), keys.end());
    for (const auto& key : keys) {
      bool any_bool = false, any_number = false;
      for (const auto& sm : g.summaries) {
        if (!sm.contains(key)) continue;
        any_bool = any_bool || sm[key].is_boolean();
        any_number = any_number || sm[key].is_number();
      }
      if (any_bool) {
        // Fraction true among runs that report the flag.
        double n = 0.0, d = 0.0;
        for (std::size_t i : order) {
          const auto& sm = g.summaries[i];
          if (!sm.contains(key) || !sm[key].is_boolean()) continue;
          d += 1.0;
          n += sm[key].get<bool>() ? 1.0 : 0.0;
        }
        rates[key] = n / d;
      } else if (any_number) {
        std::vector<double> v;
        for (std::size_t i : order) {
          const auto& sm = g.summaries[i];
          v.push_back(sm.contains(key) && sm[key].is_number() ? sm[key].get<double>() : NAN);
        }
        run_stats[key] = stat_json(mean_std(v));
      }
    }
    json seeds = json::array();
    for (std::size_t i : order) seeds.push_back(g.seeds[i]);
    out["groups"].push_back({{"value", g.value},
                             {"config_hash", g.config_hash},
                             {"seeds", seeds},
                             {"terminal", terminal},
                             {"run_summary", run_stats},
                             {"rates", rates}});
  }
  write_text(dir / "summary.csv", csv);
  write_text(dir / "summary.json", out.dump(2) + "\n");
  return out;
}

struct RunOptions {
  std::optional<std::vector<std::uint64_t>> seeds;
  std::optional<std::size_t> horizon;
};

/// Applies CLI overrides to a raw config before normalization.
inline json apply_overrides(json raw, const RunOptions& opt) {
  if (opt.seeds) raw["seeds"] = *opt.seeds;
  if (opt.horizon) raw["horizon"] = *opt.horizon;
  return raw;
}

/// Runs every (sweep value, seed) pair, writes per-run files and the summary.
inline json run_experiment(const json& normalized, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const std::string axis = normalized["sweep"].is_null() ? "" : normalized["sweep"]["axis"].get<std::string>();
  for (const auto& point : expand_sweep(normalized)) {
    for (const auto& s : normalized["seeds"]) {
      const auto seed = s.get<std::uint64_t>();
      json run_config = point.config;
      run_config["seeds"] = {seed};
      const RunLog log = run_single(run_config, seed);
      write_run(out_dir, log, run_config, axis, point.value);
    }
  }
  return summarize_dir(out_dir);
}

}  // namespace efe::harness
