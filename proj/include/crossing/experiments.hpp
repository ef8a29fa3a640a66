#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "crossing/controllers.hpp"
#include "crossing/engine.hpp"
#include "crossing/scenario.hpp"

namespace crossing {

// One sweep cell outcome: the two study metrics for (controller, R, seed).
struct MetricsRow {
  ControllerKind controller = ControllerKind::adaptive_deadline;
  double ratio = 0.0;
  std::uint64_t seed = 0;
  double mean_sojourn = 0.0;
  double worst_avg = 0.0;
  double queue1_max = 0.0;
  double queue2_max = 0.0;
  bool liveness_ok = true;
};

struct AggregateCell {
  ControllerKind controller = ControllerKind::adaptive_deadline;
  double ratio = 0.0;
  int n = 0;
  int failures = 0;
  double mean_sojourn_mean = 0.0;
  double mean_sojourn_sd = 0.0;
  double worst_avg_mean = 0.0;
  double worst_avg_sd = 0.0;
};

struct SweepSpec {
  std::vector<ControllerKind> controllers{ControllerKind::adaptive_deadline,
                                          ControllerKind::fixed_cycle_1,
                                          ControllerKind::fixed_cycle_2};
  std::vector<double> r_values{0.25, 0.5, 0.75, 1.0};
  int seed_count = 20;
  std::uint64_t seed_base = 1;
  int m2 = 200;
  double gap_lo = 4.0;
  double gap_hi = 40.0;
  int threads = 0;  // 0 picks a machine default
};

struct SweepTable {
  std::vector<MetricsRow> rows;  // complete grid: controller-major, then R, then seed
};

inline ControllerSpec make_controller(const ModelParams& p, ControllerKind kind, double ratio) {
  switch (kind) {
    case ControllerKind::adaptive_deadline: return ControllerSpec::adaptive(p);
    case ControllerKind::fixed_cycle_1: return ControllerSpec::fixed_cycle_1(p);
    case ControllerKind::fixed_cycle_2: return ControllerSpec::fixed_cycle_2(p, ratio);
  }
  throw std::domain_error("make_controller: bad kind");
}

/// Runs the full (controller, R, seed) grid. The scenario for a given
/// (R, seed) is identical across controllers, so each column sees the same
/// traffic. Cells are independent and execute on a small thread pool; rows
/// land in grid order regardless of scheduling.
inline SweepTable run_sweep(const ModelParams& p, const SweepSpec& spec, const SimConfig& cfg,
                            const std::function<void(int, int)>& progress = {}) {
  if (spec.m2 < 1) throw std::domain_error("run_sweep: m2 must be positive");
  for (double r : spec.r_values)
    if (!(r > 0.0 && r <= 1.0)) throw std::domain_error("run_sweep: R values must be in (0, 1]");
  if (spec.seed_count < 1) throw std::domain_error("run_sweep: need at least one seed");

  struct Job {
    ControllerKind controller;
    double ratio;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (ControllerKind ck : spec.controllers)
    for (double r : spec.r_values)
      for (int s = 0; s < spec.seed_count; ++s)
        jobs.push_back({ck, r, spec.seed_base + static_cast<std::uint64_t>(s)});

  SweepTable table;
  table.rows.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<int> done{0};
  const int total = static_cast<int>(jobs.size());

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& job = jobs[i];
      const int m1 = static_cast<int>(std::llround(job.ratio * spec.m2));
      const Scenario scenario =
          generate_scenario(p, m1, spec.m2, spec.gap_lo, spec.gap_hi, job.seed);
      const ControllerSpec ctrl = make_controller(p, job.controller, job.ratio);
      const SimResult result = run(p, scenario, ctrl, cfg);
      table.rows[i] = {job.controller, job.ratio,          job.seed,
                       result.mean_sojourn, result.worst_avg, result.queue_max[0],
                       result.queue_max[1], result.liveness_ok};
      if (progress) progress(done.fetch_add(1) + 1, total);
    }
  };

  int n_threads = spec.threads > 0 ? spec.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min({n_threads, 16, total}));
  std::vector<std::thread> pool;
  for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return table;
}

/// Per-(controller, R) means and sample standard deviations over seeds, in
/// the row order of the table. Rejects ragged grids.
inline std::vector<AggregateCell> aggregate(const SweepTable& table) {
  std::vector<AggregateCell> cells;
  std::vector<std::vector<const MetricsRow*>> groups;
  auto cell_index = [&](ControllerKind c, double r) -> std::size_t {
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (cells[i].controller == c && cells[i].ratio == r) return i;
    cells.push_back({c, r});
    groups.emplace_back();
    return cells.size() - 1;
  };
  for (const auto& row : table.rows) groups[cell_index(row.controller, row.ratio)].push_back(&row);

  std::size_t expected = groups.empty() ? 0 : groups.front().size();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& g = groups[i];
    if (g.size() != expected || g.empty())
      throw std::domain_error("aggregate: incomplete sweep grid");
    auto& cell = cells[i];
    cell.n = static_cast<int>(g.size());
    double sum_m = 0.0, sum_w = 0.0;
    for (const auto* row : g) {
      sum_m += row->mean_sojourn;
      sum_w += row->worst_avg;
      if (!row->liveness_ok) cell.failures += 1;
    }
    cell.mean_sojourn_mean = sum_m / cell.n;
    cell.worst_avg_mean = sum_w / cell.n;
    if (cell.n > 1) {
      double ss_m = 0.0, ss_w = 0.0;
      for (const auto* row : g) {
        ss_m += (row->mean_sojourn - cell.mean_sojourn_mean) * (row->mean_sojourn - cell.mean_sojourn_mean);
        ss_w += (row->worst_avg - cell.worst_avg_mean) * (row->worst_avg - cell.worst_avg_mean);
      }
      cell.mean_sojourn_sd = std::sqrt(ss_m / (cell.n - 1));
      cell.worst_avg_sd = std::sqrt(ss_w / (cell.n - 1));
    }
  }
  return cells;
}

// CSV with one row per (controller, R, seed) cell. Header:
//   controller,r,seed,mean_sojourn,worst_avg,queue1_max,queue2_max,liveness
inline void write_metrics_csv(std::ostream& os, const SweepTable& table) {
  os << "controller,r,seed,mean_sojourn,worst_avg,queue1_max,queue2_max,liveness\n";
  char buf[256];
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof buf, "%s,%.6f,%llu,%.6f,%.6f,%.6f,%.6f,%d", to_string(r.controller),
                  r.ratio, static_cast<unsigned long long>(r.seed), r.mean_sojourn, r.worst_avg,
                  r.queue1_max, r.queue2_max, r.liveness_ok ? 1 : 0);
    os << buf << '\n';
  }
}

inline void write_aggregate_report(std::ostream& os, const std::vector<AggregateCell>& cells) {
  os << "controller            r      n  fail  mean_sojourn        sd   worst_avg        sd\n";
  char buf[256];
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof buf, "%-18s %5.2f %6d %5d %13.4f %9.4f %11.4f %9.4f",
                  to_string(c.controller), c.ratio, c.n, c.failures, c.mean_sojourn_mean,
                  c.mean_sojourn_sd, c.worst_avg_mean, c.worst_avg_sd);
    os << buf << '\n';
  }
}

}  // namespace crossing
