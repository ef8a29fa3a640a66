// Command-line front end: closed-form bound reports, single simulations, and
// controller-comparison sweeps over a shared key=value config format.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "crossing/bounds.hpp"
#include "crossing/config.hpp"
#include "crossing/engine.hpp"
#include "crossing/experiments.hpp"
#include "crossing/version.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitLiveness = 3;
constexpr int kExitIo = 4;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Whole-file atomic write: temp file in the target directory, then rename.
void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out << content;
    if (!out) throw IoError("short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp + " to " + path.string());
}

crossing::RunSetup load_setup(const std::string& config_path,
                              const std::vector<std::string>& overrides) {
  crossing::RawConfig raw;
  if (!config_path.empty()) raw = crossing::parse_config_text(read_file(config_path));
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    const auto dot = item.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      throw crossing::ConfigError("bad --set (want section.key=value): " + item);
    raw[item.substr(0, dot)][item.substr(dot + 1, eq - dot - 1)] = item.substr(eq + 1);
  }
  return crossing::resolve_config(raw);
}

nlohmann::ordered_json bounds_json(const crossing::ModelParams& params) {
  const auto report = crossing::bounds_report(params);
  nlohmann::ordered_json j;
  j["queue_capacity"] = params.geometry.queue_capacity;
  j["d_min_s"] = report.d_min_s;
  j["d_max_s"] = report.d_max_s;
  j["first_car_s"] = report.first_car_s;
  j["last_car_s"] = report.last_car_s;
  j["launch_interval_s"] = report.launch_interval_s;
  j["slot_cruise_s"] = report.slot_cruise_s;
  j["service_rate_cars_per_s"] = report.service_rate;
  return j;
}

int cmd_bounds(const std::string& config_path, const std::vector<std::string>& overrides,
               bool as_json, const std::string& out_dir) {
  auto setup = load_setup(config_path, overrides);
  const auto report = crossing::bounds_report(setup.params);
  if (as_json) {
    std::cout << bounds_json(setup.params).dump(2) << "\n";
  } else {
    std::printf("queue capacity      %d cars\n", setup.params.geometry.queue_capacity);
    std::printf("launch interval     %.6f s\n", report.launch_interval_s);
    std::printf("slot cruise time    %.6f s\n", report.slot_cruise_s);
    std::printf("first car clears    %.6f s\n", report.first_car_s);
    std::printf("last car clears     %.6f s\n", report.last_car_s);
    std::printf("service rate        %.6f cars/s\n", report.service_rate);
    std::printf("best-case sojourn   %.6f s\n", report.d_min_s);
    std::printf("worst-case sojourn  %.6f s\n", report.d_max_s);
  }
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    atomic_write(std::filesystem::path(out_dir) / "bounds.json", bounds_json(setup.params).dump(2) + "\n");
    atomic_write(std::filesystem::path(out_dir) / "manifest.conf", crossing::emit_config(setup));
  }
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::vector<std::string>& overrides,
                 bool as_json, const std::string& out_dir) {
  auto setup = load_setup(config_path, overrides);
  if (!setup.has_scenario) throw crossing::ConfigError("simulate needs a [scenario] section");
  if (!setup.has_controller) throw crossing::ConfigError("simulate needs a [controller] section");
  setup.has_sweep = false;
  crossing::pin_controller_defaults(setup);

  const auto scenario = crossing::materialize_scenario(setup.params, setup.scenario);
  const auto controller =
      crossing::resolve_controller(setup.params, setup.controller, scenario.ratio);
  const auto result = crossing::run(setup.params, scenario, controller, setup.sim);

  if (as_json) {
    std::cout << result.to_json().dump(2) << "\n";
  } else {
    std::printf("cars                %zu\n", result.cars.size());
    std::printf("mean sojourn        %.6f s\n", result.mean_sojourn);
    std::printf("worst-queue average %.6f s\n", result.worst_avg);
    if (!result.liveness_ok)
      std::printf("liveness FAILED: %zu cars still queued at max_t\n", result.stranded_ids.size());
  }
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    atomic_write(std::filesystem::path(out_dir) / "result.json", result.to_json().dump(2) + "\n");
    std::ostringstream trace;
    crossing::write_trace(trace, result.events);
    atomic_write(std::filesystem::path(out_dir) / "trace.txt", trace.str());
    atomic_write(std::filesystem::path(out_dir) / "manifest.conf", crossing::emit_config(setup));
  }
  return result.liveness_ok ? 0 : kExitLiveness;
}

int cmd_sweep(const std::string& config_path, const std::vector<std::string>& overrides,
              const std::string& out_dir) {
  auto setup = load_setup(config_path, overrides);
  setup.has_sweep = true;
  setup.has_scenario = false;
  setup.has_controller = false;

  std::fprintf(stderr, "sweep: %zu controllers x %zu R values x %d seeds, m2=%d, gaps [%g, %g]\n",
               setup.sweep.controllers.size(), setup.sweep.r_values.size(),
               setup.sweep.seed_count, setup.sweep.m2, setup.sweep.gap_lo, setup.sweep.gap_hi);
  auto progress = [](int done, int total) {
    if (done == total || done % 25 == 0) std::fprintf(stderr, "  %d/%d cells\n", done, total);
  };
  const auto table = crossing::run_sweep(setup.params, setup.sweep, setup.sim, progress);
  const auto cells = crossing::aggregate(table);

  std::ostringstream agg;
  crossing::write_aggregate_report(agg, cells);
  std::cout << agg.str();

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ostringstream csv;
    crossing::write_metrics_csv(csv, table);
    atomic_write(std::filesystem::path(out_dir) / "metrics.csv", csv.str());
    atomic_write(std::filesystem::path(out_dir) / "aggregate.txt", agg.str());
    atomic_write(std::filesystem::path(out_dir) / "manifest.conf", crossing::emit_config(setup));
  }
  for (const auto& row : table.rows)
    if (!row.liveness_ok) return kExitLiveness;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-queue intersection: sojourn bounds, simulation, controller sweeps"};
  app.set_version_flag("--version", std::string(crossing::version_string));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  bool as_json = false;

  std::string controller_name;
  long long seed = -1;
  long long seeds = -1;
  long long threads = -1;
  double dt = -1.0;
  std::string r_values;

  auto add_common = [&](CLI::App* cmd, bool with_json) {
    cmd->add_option("--config", config_path, "config file (key = value sections)");
    cmd->add_option("--set", overrides, "override a config entry: section.key=value");
    cmd->add_option("--out", out_dir, "output directory (files + manifest)");
    cmd->add_option("--dt", dt, "simulation step in seconds");
    if (with_json) cmd->add_flag("--json", as_json, "machine-readable output on stdout");
  };

  auto* bounds = app.add_subcommand("bounds", "closed-form sojourn bounds for a parameter set");
  add_common(bounds, true);

  auto* simulate = app.add_subcommand("simulate", "run one scenario under one controller");
  add_common(simulate, true);
  simulate->add_option("--controller", controller_name,
                       "adaptive_deadline | fixed_cycle_1 | fixed_cycle_2");
  simulate->add_option("--seed", seed, "scenario seed");

  auto* sweep = app.add_subcommand("sweep", "controller-comparison sweep over R and seeds");
  add_common(sweep, false);
  sweep->add_option("--seeds", seeds, "replications per (controller, R) cell");
  sweep->add_option("--r-values", r_values, "comma-separated R list, e.g. 0.25,0.5");
  sweep->add_option("--threads", threads, "worker threads (0 = machine default)");

  CLI11_PARSE(app, argc, argv);

  if (!controller_name.empty()) overrides.push_back("controller.kind=" + controller_name);
  if (seed >= 0) overrides.push_back("scenario.seed=" + std::to_string(seed));
  if (seeds >= 0) overrides.push_back("sweep.seeds=" + std::to_string(seeds));
  if (threads >= 0) overrides.push_back("sweep.threads=" + std::to_string(threads));
  if (dt > 0.0) overrides.push_back("sim.dt=" + crossing::detail::format_double(dt));
  if (!r_values.empty()) overrides.push_back("sweep.r_values=" + r_values);

  try {
    if (bounds->parsed()) return cmd_bounds(config_path, overrides, as_json, out_dir);
    if (simulate->parsed()) return cmd_simulate(config_path, overrides, as_json, out_dir);
    if (sweep->parsed()) return cmd_sweep(config_path, overrides, out_dir);
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const crossing::SimulationError& e) {
    std::cerr << "simulation error: " << e.what() << "\n";
    return kExitLiveness;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
