#pragma once

// Experiment configuration: TOML or JSON input, defaults, field-level
// validation, the single sweep axis and configuration hashing.

#include <json.hpp>
#include <toml.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "efe/error.hpp"

namespace efe::harness {

using json = nlohmann::json;

inline constexpr const char* kOneAxisRule = "exactly one sweep axis per invocation (one-factor-at-a-time rule)";

[[noreturn]] inline void config_error(const std::string& field, const std::string& msg) {
  throw Error(Errc::ConfigValidation, field + ": " + msg);
}

// ---------------------------------------------------------------------------
// Loading

inline json toml_to_json(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    json j = json::object();
    for (const auto& [k, v] : *t) j[std::string(k.str())] = toml_to_json(v);
    return j;
  }
  if (const auto* a = node.as_array()) {
    json j = json::array();
    for (const auto& v : *a) j.push_back(toml_to_json(v));
    return j;
  }
  if (const auto* s = node.as_string()) return s->get();
  if (const auto* i = node.as_integer()) return i->get();
  if (const auto* f = node.as_floating_point()) return f->get();
  if (const auto* b = node.as_boolean()) return b->get();
  throw Error(Errc::ConfigValidation, "unsupported TOML value (dates and times are not config values)");
}

inline json parse_config_text(const std::string& text, bool is_json) {
  if (is_json) {
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      throw Error(Errc::ConfigValidation, std::string("JSON parse error: ") + e.what());
    }
  }
  try {
    return toml_to_json(toml::parse(text));
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "TOML parse error at line " << e.source().begin.line << ": " << e.description();
    throw Error(Errc::ConfigValidation, os.str());
  }
}

/// Reads a .toml or .json config file (JSON when the extension is .json).
inline json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::ConfigValidation, "cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.extension() == ".json");
}

// ---------------------------------------------------------------------------
// Schema and defaults

inline const std::set<std::string>& experiment_names() {
  static const std::set<std::string> names{"sandbox", "gp-bandit", "plume", "composite"};
  return names;
}

inline json environment_defaults(const std::string& experiment) {
  if (experiment == "sandbox") return {{"obs_std", 0.2}, {"true_state", 2}, {"prior_true_mass", nullptr}};
  if (experiment == "gp-bandit") {
    return {{"n_grid", 200}, {"noise_sd", 0.05}, {"lengthscale", 0.08}, {"output_scale", 1.0}, {"delta", 0.05}};
  }
  if (experiment == "plume") return {{"task", "localization"}, {"sensors_per_side", 20}, {"dt", 1.0}};
  return {{"map_seed", 7},      {"pool_size", 16},    {"noise_sd", 0.02},
          {"lengthscale", 2.0}, {"dm_lambda", 0.1},   {"true_weights", {1.0, -1.0, 2.0, 1.0}},
          {"prior_var", 25.0}};
}

inline std::string energy_kind_for(const std::string& experiment) {
  if (experiment == "sandbox") return "quadratic";
  if (experiment == "gp-bandit") return "biased-regret";
  if (experiment == "plume") return "saturation";
  return "preference-efe";
}

inline json energy_defaults(const std::string& kind) {
  if (kind == "quadratic") return {{"kind", kind}, {"a", 0.25}, {"c", 0.0}};
  if (kind == "saturation") return {{"kind", kind}, {"y_max", nullptr}};
  if (kind == "biased-regret") return {{"kind", kind}, {"schedule", "aligned"}, {"amplitude", 2.0}, {"rate", 0.0}};
  return {{"kind", kind},
          {"heuristic", "learned"},
          {"gamma", 1.0},
          {"bias_weights", {1.0, -1.0, 10.0, 1.0}}};
}

inline json curiosity_defaults(const std::string& experiment) {
  const double beta0 = experiment == "sandbox" ? 2.0 : 1.0;
  return {{"kind", "constant"}, {"beta0", beta0}, {"rate", 0.0}, {"margin", 1.5}};
}

inline std::size_t default_horizon(const std::string& experiment) { return experiment == "sandbox" ? 150 : 100; }

namespace detail {

inline bool same_kind(const json& def, const json& v) {
  if (def.is_null()) return v.is_null() || v.is_number();
  if (def.is_number_integer()) return v.is_number_integer() && v.get<std::int64_t>() >= 0;
  if (def.is_number()) return v.is_number();
  if (def.is_string()) return v.is_string();
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_array()) {
    if (!v.is_array() || v.size() != def.size()) return false;
    for (const auto& e : v) {
      if (!e.is_number()) return false;
    }
    return true;
  }
  return false;
}

inline std::string kind_name(const json& def) {
  if (def.is_null()) return "a number (or omitted)";
  if (def.is_number_integer()) return "a nonnegative integer";
  if (def.is_number()) return "a number";
  if (def.is_string()) return "a string";
  if (def.is_boolean()) return "a boolean";
  if (def.is_array()) return "an array of " + std::to_string(def.size()) + " numbers";
  return "?";
}

// Overlays `given` on `defaults`, rejecting unknown keys and wrong types.
inline json merge_section(const std::string& section, const json& defaults, const json& given) {
  json out = defaults;
  if (given.is_null()) return out;
  if (!given.is_object()) config_error(section, "must be a table");
  for (const auto& [k, v] : given.items()) {
    if (!defaults.contains(k)) config_error(section + "." + k, "unknown field");
    if (!same_kind(defaults[k], v)) config_error(section + "." + k, "must be " + kind_name(defaults[k]));
    if (defaults[k].is_number_float() && v.is_number_integer()) out[k] = v.get<double>();
    else if (defaults[k].is_array()) {
      json arr = json::array();
      for (const auto& e : v) arr.push_back(e.get<double>());
      out[k] = arr;
    } else {
      out[k] = v;
    }
  }
  return out;
}

inline void require_range(bool ok, const std::string& field, const std::string& msg) {
  if (!ok) config_error(field, msg);
}

}  // namespace detail

/// Validates the sweep section and returns {axis, values} (or null).
inline json normalize_sweep(const json& sweep) {
  if (sweep.is_null()) return nullptr;
  json s = sweep;
  if (s.is_array()) {
    if (s.size() != 1) config_error("sweep", kOneAxisRule);
    s = s[0];
  }
  if (!s.is_object()) config_error("sweep", "must be a table with 'axis' and 'values'");
  for (const auto& [k, v] : s.items()) {
    if (k != "axis" && k != "values") config_error("sweep." + k, std::string("unknown field; ") + kOneAxisRule);
  }
  if (!s.contains("axis")) config_error("sweep.axis", "missing");
  json axis = s["axis"];
  if (axis.is_array()) {
    if (axis.size() != 1) config_error("sweep.axis", kOneAxisRule);
    axis = axis[0];
  }
  if (!axis.is_string() || axis.get<std::string>().empty()) config_error("sweep.axis", "must be a dotted field path");
  if (!s.contains("values") || !s["values"].is_array() || s["values"].empty()) {
    config_error("sweep.values", "must be a nonempty array");
  }
  for (const auto& v : s["values"]) {
    if (v.is_array()) config_error("sweep.values", kOneAxisRule);
  }
  return {{"axis", axis}, {"values", s["values"]}};
}

/// Fills defaults and validates every field except the sweep values, which
/// are checked by expand_sweep.
inline json normalize_config(const json& raw) {
  if (!raw.is_object()) config_error("config", "top level must be a table");
  static const std::set<std::string> top{"experiment", "horizon", "seeds",  "environment",
                                         "energy",     "curiosity", "sweep", "output"};
  for (const auto& [k, v] : raw.items()) {
    if (!top.contains(k)) config_error(k, "unknown field");
  }
  if (!raw.contains("experiment") || !raw["experiment"].is_string()) config_error("experiment", "missing");
  const std::string exp = raw["experiment"];
  if (!experiment_names().contains(exp)) {
    config_error("experiment", "unknown experiment '" + exp + "' (sandbox|gp-bandit|plume|composite)");
  }
  json c;
  c["experiment"] = exp;
  c["horizon"] = default_horizon(exp);
  if (raw.contains("horizon")) {
    if (!raw["horizon"].is_number_integer() || raw["horizon"].get<std::int64_t>() < 1) {
      config_error("horizon", "must be a positive integer");
    }
    c["horizon"] = raw["horizon"];
  }
  c["seeds"] = {0, 1, 2, 3, 4};
  if (raw.contains("seeds")) {
    const auto& s = raw["seeds"];
    if (!s.is_array() || s.empty()) config_error("seeds", "must be a nonempty array of integers");
    for (const auto& v : s) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0) config_error("seeds", "entries must be integers >= 0");
    }
    c["seeds"] = s;
  }
  c["output"] = raw.value("output", std::string("results"));
  c["environment"] = detail::merge_section("environment", environment_defaults(exp), raw.value("environment", json()));

  const std::string kind = energy_kind_for(exp);
  json energy = raw.value("energy", json::object());
  if (energy.is_object() && energy.contains("kind") && energy["kind"] != kind) {
    config_error("energy.kind", "experiment '" + exp + "' uses energy kind '" + kind + "'");
  }
  c["energy"] = detail::merge_section("energy", energy_defaults(kind), energy);
  c["curiosity"] = detail::merge_section("curiosity", curiosity_defaults(exp), raw.value("curiosity", json()));
  c["sweep"] = normalize_sweep(raw.value("sweep", json()));

  using detail::require_range;
  const auto& env = c["environment"];
  const auto& en = c["energy"];
  const auto& cu = c["curiosity"];
  if (exp == "sandbox") {
    require_range(env["obs_std"].get<double>() >= 0.0, "environment.obs_std", "must be >= 0");
    require_range(env["true_state"].get<std::int64_t>() < 6, "environment.true_state", "must be in 0..5");
    if (!env["prior_true_mass"].is_null()) {
      const double m = env["prior_true_mass"];
      require_range(m > 0.0 && m < 1.0, "environment.prior_true_mass", "must lie in (0, 1)");
    }
    const double a = en["a"];
    require_range(a >= 0.15 && a <= 0.35, "energy.a", "sandbox curvature must lie in [0.15, 0.35]");
  } else if (exp == "gp-bandit") {
    require_range(env["n_grid"].get<std::int64_t>() >= 2, "environment.n_grid", "must be >= 2");
    require_range(env["noise_sd"].get<double>() > 0.0, "environment.noise_sd", "must be > 0");
    require_range(env["lengthscale"].get<double>() > 0.0, "environment.lengthscale", "must be > 0");
    const double s = env["output_scale"];
    require_range(s > 0.0 && s <= 1.0, "environment.output_scale", "must lie in (0, 1]");
    const double d = env["delta"];
    require_range(d > 0.0 && d < 1.0, "environment.delta", "must lie in (0, 1)");
    static const std::set<std::string> schedules{"aligned", "constant", "slow", "fast", "exponential"};
    require_range(schedules.contains(en["schedule"].get<std::string>()), "energy.schedule",
                  "must be aligned|constant|slow|fast|exponential");
    require_range(en["rate"].get<double>() >= 0.0, "energy.rate", "must be >= 0");
  } else if (exp == "plume") {
    static const std::set<std::string> tasks{"localization", "wind", "active-set"};
    require_range(tasks.contains(env["task"].get<std::string>()), "environment.task",
                  "must be localization|wind|active-set");
    require_range(env["sensors_per_side"].get<std::int64_t>() >= 1, "environment.sensors_per_side", "must be >= 1");
    require_range(env["dt"].get<double>() > 0.0, "environment.dt", "must be > 0");
  } else {
    require_range(env["pool_size"].get<std::int64_t>() >= 2, "environment.pool_size", "must be >= 2");
    require_range(env["noise_sd"].get<double>() > 0.0, "environment.noise_sd", "must be > 0");
    require_range(env["lengthscale"].get<double>() > 0.0, "environment.lengthscale", "must be > 0");
    require_range(env["dm_lambda"].get<double>() > 0.0, "environment.dm_lambda", "must be > 0");
    require_range(env["prior_var"].get<double>() > 0.0, "environment.prior_var", "must be > 0");
    static const std::set<std::string> heuristics{"learned", "constant-bias", "true"};
    require_range(heuristics.contains(en["heuristic"].get<std::string>()), "energy.heuristic",
                  "must be learned|constant-bias|true");
    require_range(en["gamma"].get<double>() >= 0.0, "energy.gamma", "must be >= 0");
  }
  static const std::set<std::string> kinds{"constant", "annealed", "adaptive"};
  require_range(kinds.contains(cu["kind"].get<std::string>()), "curiosity.kind", "must be constant|annealed|adaptive");
  require_range(cu["beta0"].get<double>() >= 0.0, "curiosity.beta0", "must be >= 0");
  require_range(cu["rate"].get<double>() >= 0.0, "curiosity.rate", "must be >= 0");
  require_range(cu["margin"].get<double>() >= 1.0, "curiosity.margin", "must be >= 1");
  return c;
}

// ---------------------------------------------------------------------------
// Sweeps and hashing

inline json::json_pointer axis_pointer(const std::string& axis) {
  std::string p;
  std::stringstream ss(axis);
  std::string part;
  while (std::getline(ss, part, '.')) p += "/" + part;
  return json::json_pointer(p);
}

/// Sets the dotted path `axis` to `value` and re-validates.
inline json apply_axis(const json& normalized, const std::string& axis, const json& value) {
  static const std::set<std::string> frozen{"experiment", "seeds", "output", "sweep"};
  const auto root = axis.substr(0, axis.find('.'));
  if (frozen.contains(root)) config_error("sweep.axis", "'" + axis + "' cannot be swept");
  const auto ptr = axis_pointer(axis);
  if (!normalized.contains(ptr) || normalized.at(ptr).is_object()) {
    config_error("sweep.axis", "'" + axis + "' is not a config field");
  }
  json raw = normalized;
  raw.erase("sweep");
  raw[ptr] = value;
  try {
    return normalize_config(raw);
  } catch (const Error& e) {
    throw Error(Errc::ConfigValidation, std::string("sweep value ") + value.dump() + " for '" + axis + "': " + e.what());
  }
}

struct SweepPoint {
  json value;   // null when the config has no sweep
  json config;  // normalized, sweep removed
};

inline std::vector<SweepPoint> expand_sweep(const json& normalized) {
  std::vector<SweepPoint> out;
  if (normalized["sweep"].is_null()) {
    json c = normalized;
    c["sweep"] = nullptr;
    out.push_back({nullptr, c});
    return out;
  }
  const std::string axis = normalized["sweep"]["axis"];
  for (const auto& v : normalized["sweep"]["values"]) {
    json c = apply_axis(normalized, axis, v);
    c["sweep"] = nullptr;
    out.push_back({v, c});
  }
  return out;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Hash of the run-defining fields (seeds and output location excluded).
inline std::string config_hash(const json& run_config) {
  json c = run_config;
  c.erase("seeds");
  c.erase("output");
  c.erase("sweep");
  return hex64(fnv1a(c.dump()));
}

/// Hash of the run config with the swept field removed, shared by every
/// run of one sweep.
inline std::string base_hash(const json& run_config, const std::string& axis) {
  json c = run_config;
  if (!axis.empty()) {
    const auto ptr = axis_pointer(axis);
    if (c.contains(ptr)) c[ptr] = "<swept:" + axis + ">";
  }
  return config_hash(c);
}

}  // namespace efe::harness
