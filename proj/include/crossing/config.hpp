#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "crossing/controllers.hpp"
#include "crossing/experiments.hpp"
#include "crossing/model.hpp"
#include "crossing/scenario.hpp"
#include "crossing/version.hpp"
#include "crossing/world.hpp"

namespace crossing {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Declarative scenario description; materialized into car placements on use.
struct ScenarioSetup {
  std::string kind = "generated";  // generated | packed_queue | free_flow | saturated
  int m1 = 0;
  int m2 = 0;
  double gap_lo = 4.0;
  double gap_hi = 40.0;
  std::uint64_t seed = 1;
};

struct ControllerSetup {
  ControllerKind kind = ControllerKind::adaptive_deadline;
  double deadline_s = std::numeric_limits<double>::quiet_NaN();  // NaN = d_max
  double margin_s = std::numeric_limits<double>::quiet_NaN();    // NaN = T_Y + T_1
  double green_s = std::numeric_limits<double>::quiet_NaN();     // NaN = T_N
  double ratio = std::numeric_limits<double>::quiet_NaN();       // NaN = scenario R
  bool yellow_included = false;
};

// Everything a run needs, as parsed from one config file. The emitted form of
// a resolved RunSetup is the run manifest: parsing it back reproduces the run.
struct RunSetup {
  ModelParams params;
  SimConfig sim;
  ScenarioSetup scenario;
  ControllerSetup controller;
  SweepSpec sweep;
  bool has_scenario = false;
  bool has_controller = false;
  bool has_sweep = false;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, end);
}

inline double parse_double(const std::string& section, const std::string& key,
                           const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad number for " + section + "." + key + ": '" + value + "'");
  }
}

inline std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace detail

// Key = value sections as read from disk, before resolution.
using RawConfig = std::map<std::string, std::map<std::string, std::string>>;

inline RawConfig parse_config_text(const std::string& text) {
  RawConfig raw;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    lineno += 1;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": bad section header");
      section = detail::trim(t.substr(1, t.size() - 2));
      raw[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": key outside any [section]");
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    raw[section][key] = value;
  }
  return raw;
}

namespace detail {

class SectionReader {
 public:
  SectionReader(const RawConfig& raw, std::string name) : name_(std::move(name)) {
    const auto it = raw.find(name_);
    if (it != raw.end()) entries_ = &it->second;
  }

  bool present() const { return entries_ != nullptr; }

  bool has(const std::string& key) const {
    return entries_ != nullptr && entries_->count(key) > 0;
  }

  std::string str(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    return entries_->at(key);
  }

  double num(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return parse_double(name_, key, entries_->at(key));
  }

  double required_num(const std::string& key) const {
    if (!has(key)) throw ConfigError("missing required key " + name_ + "." + key);
    return parse_double(name_, key, entries_->at(key));
  }

  long long integer(const std::string& key, long long fallback) const {
    const double v = num(key, static_cast<double>(fallback));
    if (v != std::floor(v)) throw ConfigError(name_ + "." + key + " must be an integer");
    return static_cast<long long>(v);
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = entries_->at(key);
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw ConfigError(name_ + "." + key + " must be a boolean");
  }

 private:
  std::string name_;
  const std::map<std::string, std::string>* entries_ = nullptr;
};

}  // namespace detail

/// Resolves a raw config into a runnable setup. Model parameters are
/// validated; every violation is reported at once.
inline RunSetup resolve_config(const RawConfig& raw) {
  using detail::SectionReader;
  static const std::map<std::string, std::vector<std::string>> known = {
      {"dynamics", {"mass", "force", "drag_c1"}},
      {"geometry", {"car_length", "intersection_length", "queue_zone", "safe_gap"}},
      {"speeds", {"v_max", "v_safe"}},
      {"signal", {"yellow"}},
      {"sim", {"dt", "max_t", "initial_green"}},
      {"scenario", {"kind", "m1", "m2", "d1", "d2", "seed"}},
      {"controller", {"kind", "deadline", "margin", "green", "ratio", "yellow_included"}},
      {"sweep",
       {"controllers", "r_values", "seeds", "seed_base", "m2", "d1", "d2", "threads"}},
      {"meta", {"tool_version"}},
  };
  for (const auto& [section, keys] : raw) {
    const auto it = known.find(section);
    if (it == known.end()) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [key, value] : keys) {
      (void)value;
      bool ok = false;
      for (const auto& k : it->second) ok = ok || k == key;
      if (!ok) throw ConfigError("unknown key " + section + "." + key);
    }
  }

  RunSetup setup;
  const SectionReader dynamics(raw, "dynamics");
  const SectionReader geometry(raw, "geometry");
  const SectionReader speeds(raw, "speeds");
  const SectionReader signal(raw, "signal");
  const double v_max = speeds.required_num("v_max");
  setup.params.dynamics = VehicleDynamics::from(
      dynamics.required_num("mass"), dynamics.required_num("force"),
      dynamics.required_num("drag_c1"));
  setup.params.geometry = Geometry::from(
      geometry.required_num("car_length"), geometry.required_num("intersection_length"),
      geometry.required_num("queue_zone"), geometry.required_num("safe_gap"));
  setup.params.speeds = SpeedLimits{v_max, speeds.num("v_safe", v_max / 2.0)};
  setup.params.signal = SignalTiming{signal.required_num("yellow")};
  {
    const auto violations = validate(setup.params);
    if (!violations.empty()) {
      std::string msg = "invalid model parameters:";
      for (const auto& v : violations) msg += "\n  - " + v;
      throw std::invalid_argument(msg);
    }
  }

  const SectionReader sim(raw, "sim");
  setup.sim.dt = sim.num("dt", 0.01);
  setup.sim.max_t = sim.num("max_t", 3600.0);
  setup.sim.initial_green = static_cast<int>(sim.integer("initial_green", 1));
  if (!(setup.sim.dt > 0.0)) throw ConfigError("sim.dt must be positive");
  if (!(setup.sim.max_t > 0.0)) throw ConfigError("sim.max_t must be positive");
  if (setup.sim.initial_green < 0 || setup.sim.initial_green > 2)
    throw ConfigError("sim.initial_green must be 0, 1, or 2");

  const SectionReader scenario(raw, "scenario");
  if (scenario.present()) {
    setup.has_scenario = true;
    setup.scenario.kind = scenario.str("kind", "generated");
    setup.scenario.m1 = static_cast<int>(scenario.integer("m1", 0));
    setup.scenario.m2 = static_cast<int>(scenario.integer("m2", 0));
    setup.scenario.gap_lo = scenario.num("d1", 4.0);
    setup.scenario.gap_hi = scenario.num("d2", 40.0);
    setup.scenario.seed = static_cast<std::uint64_t>(scenario.integer("seed", 1));
  }

  const SectionReader controller(raw, "controller");
  if (controller.present()) {
    setup.has_controller = true;
    setup.controller.kind = controller_kind_from(controller.str("kind", "adaptive_deadline"));
    setup.controller.deadline_s = controller.num("deadline", setup.controller.deadline_s);
    setup.controller.margin_s = controller.num("margin", setup.controller.margin_s);
    setup.controller.green_s = controller.num("green", setup.controller.green_s);
    setup.controller.ratio = controller.num("ratio", setup.controller.ratio);
    setup.controller.yellow_included = controller.boolean("yellow_included", false);
  }

  const SectionReader sweep(raw, "sweep");
  if (sweep.present()) {
    setup.has_sweep = true;
    if (sweep.has("controllers")) {
      setup.sweep.controllers.clear();
      for (const auto& name : detail::split_list(sweep.str("controllers", "")))
        setup.sweep.controllers.push_back(controller_kind_from(name));
    }
    if (sweep.has("r_values")) {
      setup.sweep.r_values.clear();
      for (const auto& item : detail::split_list(sweep.str("r_values", "")))
        setup.sweep.r_values.push_back(detail::parse_double("sweep", "r_values", item));
    }
    setup.sweep.seed_count = static_cast<int>(sweep.integer("seeds", 20));
    setup.sweep.seed_base = static_cast<std::uint64_t>(sweep.integer("seed_base", 1));
    setup.sweep.m2 = static_cast<int>(sweep.integer("m2", 200));
    setup.sweep.gap_lo = sweep.num("d1", 4.0);
    setup.sweep.gap_hi = sweep.num("d2", 40.0);
    setup.sweep.threads = static_cast<int>(sweep.integer("threads", 0));
  }

  return setup;
}

inline RunSetup parse_config(const std::string& text) { return resolve_config(parse_config_text(text)); }

/// Controller spec with every default filled in from the model.
inline ControllerSpec resolve_controller(const ModelParams& p, const ControllerSetup& c,
                                         double scenario_ratio) {
  switch (c.kind) {
    case ControllerKind::adaptive_deadline:
      return ControllerSpec::adaptive(p, c.deadline_s, c.margin_s);
    case ControllerKind::fixed_cycle_1:
      return ControllerSpec::fixed_cycle_1(p, c.green_s, c.yellow_included);
    case ControllerKind::fixed_cycle_2: {
      const double ratio = std::isnan(c.ratio) ? scenario_ratio : c.ratio;
      return ControllerSpec::fixed_cycle_2(p, ratio, c.green_s, c.yellow_included);
    }
  }
  throw std::domain_error("resolve_controller: bad kind");
}

/// Builds the initial car placement a setup describes.
inline Scenario materialize_scenario(const ModelParams& p, const ScenarioSetup& s) {
  if (s.kind == "generated")
    return generate_scenario(p, s.m1, s.m2, s.gap_lo, s.gap_hi, s.seed);
  if (s.kind == "packed_queue")
    return packed_queue_scenario(p, s.m1 > 0 ? s.m1 : p.geometry.queue_capacity);
  if (s.kind == "free_flow") return free_flow_scenario(p);
  if (s.kind == "saturated") return saturated_scenario(p);
  throw ConfigError("unknown scenario kind: " + s.kind);
}

/// Canonical emission: fixed section and key order, shortest exact floats.
/// Emitting a resolved setup yields the run manifest.
inline std::string emit_config(const RunSetup& setup) {
  using detail::format_double;
  std::string out;
  auto line = [&out](const std::string& key, const std::string& value) {
    out += key + " = " + value + "\n";
  };

  out += "[dynamics]\n";
  line("mass", format_double(setup.params.dynamics.mass_kg));
  line("force", format_double(setup.params.dynamics.drive_force_n));
  line("drag_c1", format_double(setup.params.dynamics.drag_coeff));
  out += "\n[geometry]\n";
  line("car_length", format_double(setup.params.geometry.car_length));
  line("intersection_length", format_double(setup.params.geometry.intersection_length));
  line("queue_zone", format_double(setup.params.geometry.queue_zone_length));
  line("safe_gap", format_double(setup.params.geometry.safe_gap));
  out += "\n[speeds]\n";
  line("v_max", format_double(setup.params.speeds.v_max));
  line("v_safe", format_double(setup.params.speeds.v_safe));
  out += "\n[signal]\n";
  line("yellow", format_double(setup.params.signal.yellow_s));
  out += "\n[sim]\n";
  line("dt", format_double(setup.sim.dt));
  line("max_t", format_double(setup.sim.max_t));
  line("initial_green", std::to_string(setup.sim.initial_green));

  if (setup.has_scenario) {
    out += "\n[scenario]\n";
    line("kind", setup.scenario.kind);
    line("m1", std::to_string(setup.scenario.m1));
    line("m2", std::to_string(setup.scenario.m2));
    line("d1", format_double(setup.scenario.gap_lo));
    line("d2", format_double(setup.scenario.gap_hi));
    line("seed", std::to_string(setup.scenario.seed));
  }
  if (setup.has_controller) {
    out += "\n[controller]\n";
    line("kind", to_string(setup.controller.kind));
    if (!std::isnan(setup.controller.deadline_s))
      line("deadline", format_double(setup.controller.deadline_s));
    if (!std::isnan(setup.controller.margin_s))
      line("margin", format_double(setup.controller.margin_s));
    if (!std::isnan(setup.controller.green_s))
      line("green", format_double(setup.controller.green_s));
    if (!std::isnan(setup.controller.ratio)) line("ratio", format_double(setup.controller.ratio));
    line("yellow_included", setup.controller.yellow_included ? "1" : "0");
  }
  if (setup.has_sweep) {
    out += "\n[sweep]\n";
    std::string controllers;
    for (const auto& c : setup.sweep.controllers) {
      if (!controllers.empty()) controllers += ",";
      controllers += to_string(c);
    }
    line("controllers", controllers);
    std::string rs;
    for (double r : setup.sweep.r_values) {
      if (!rs.empty()) rs += ",";
      rs += format_double(r);
    }
    line("r_values", rs);
    line("seeds", std::to_string(setup.sweep.seed_count));
    line("seed_base", std::to_string(setup.sweep.seed_base));
    line("m2", std::to_string(setup.sweep.m2));
    line("d1", format_double(setup.sweep.gap_lo));
    line("d2", format_double(setup.sweep.gap_hi));
    line("threads", std::to_string(setup.sweep.threads));
  }
  out += "\n[meta]\n";
  line("tool_version", std::string(version_string));
  return out;
}

/// Fills every controller default so the emitted manifest pins the numbers
/// actually used by the run.
inline void pin_controller_defaults(RunSetup& setup) {
  if (!setup.has_controller) return;
  const double ratio = std::isnan(setup.controller.ratio)
                           ? (setup.scenario.m2 > 0
                                  ? static_cast<double>(setup.scenario.m1) / setup.scenario.m2
                                  : 1.0)
                           : setup.controller.ratio;
  const ControllerSpec spec = resolve_controller(setup.params, setup.controller, ratio);
  switch (spec.kind) {
    case ControllerKind::adaptive_deadline:
      setup.controller.deadline_s = spec.deadline_s;
      setup.controller.margin_s = spec.switch_margin_s;
      break;
    case ControllerKind::fixed_cycle_1:
      // The manifest pins the effective green, so the flag must not reduce
      // it a second time on re-parse.
      setup.controller.green_s = spec.green1_s;
      setup.controller.yellow_included = false;
      break;
    case ControllerKind::fixed_cycle_2:
      setup.controller.green_s = spec.green2_s;
      setup.controller.ratio = spec.ratio;
      setup.controller.yellow_included = false;
      break;
  }
}

}  // namespace crossing
