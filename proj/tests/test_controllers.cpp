#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "crossing/bounds.hpp"
#include "crossing/controllers.hpp"
#include "crossing/engine.hpp"
#include "crossing/scenario.hpp"
#include "support/reference.hpp"

using namespace crossing;

namespace {

Observation obs_at(double t, LightPhase light) {
  Observation o;
  o.t = t;
  o.light = light;
  return o;
}

LightPhase green(int dir, double since) {
  LightPhase l;
  l.kind = PhaseKind::green;
  l.green_dir = dir;
  l.phase_start = since;
  return l;
}

}  // namespace

TEST_CASE("adaptive controller decision branches") {
  const auto p = testref::params();
  const auto spec = ControllerSpec::adaptive(p);
  const double threshold = spec.deadline_s - spec.switch_margin_s;

  SECTION("idle green with a car waiting on the other side switches") {
    auto o = obs_at(10.0, green(1, 0.0));
    o.zone[1].push_back({7, 4.0, -2.0, 0.0});
    const auto cmd = decide(spec, o);
    CHECK(cmd.kind == Command::Kind::begin_switch);
    CHECK(cmd.target == 2);
    CHECK(cmd.reason == Command::Reason::idle);
  }

  SECTION("busy green holds while every deadline has margin") {
    auto o = obs_at(30.0, green(1, 0.0));
    o.zone[0].push_back({1, 30.0, -1.0, 3.0});
    o.zone[1].push_back({2, threshold - 0.1, 0.0, 0.0});
    CHECK(decide(spec, o).kind == Command::Kind::hold);
  }

  SECTION("a red-side car at the trigger age forces the switch") {
    auto o = obs_at(30.0, green(1, 0.0));
    o.zone[0].push_back({1, 30.0, -1.0, 3.0});
    o.zone[1].push_back({2, threshold, 0.0, 0.0});
    const auto cmd = decide(spec, o);
    CHECK(cmd.kind == Command::Kind::begin_switch);
    CHECK(cmd.target == 2);
    CHECK(cmd.reason == Command::Reason::deadline);
  }

  SECTION("an occupied box is busy even when the green zone is empty") {
    auto o = obs_at(10.0, green(1, 0.0));
    o.box_occupied[0] = true;
    o.zone[1].push_back({2, 1.0, -50.0, 0.0});
    CHECK(decide(spec, o).kind == Command::Kind::hold);
  }

  SECTION("nothing to serve holds") {
    auto o = obs_at(10.0, green(1, 0.0));
    CHECK(decide(spec, o).kind == Command::Kind::hold);
  }

  SECTION("yellow in progress holds") {
    LightPhase l;
    l.kind = PhaseKind::yellow;
    l.pending_dir = 2;
    l.phase_start = 9.0;
    auto o = obs_at(10.0, l);
    o.zone[1].push_back({2, 100.0, 0.0, 0.0});
    CHECK(decide(spec, o).kind == Command::Kind::hold);
  }

  SECTION("all-red start picks the closest head, lower queue on ties") {
    LightPhase l;  // all_red
    auto o = obs_at(0.0, l);
    o.zone[0].push_back({1, 0.0, -30.0, 0.0});
    o.zone[1].push_back({2, 0.0, -30.0, 0.0});
    auto cmd = decide(spec, o);
    CHECK(cmd.kind == Command::Kind::begin_switch);
    CHECK(cmd.target == 1);

    o.zone[1][0].front_pos = -10.0;
    cmd = decide(spec, o);
    CHECK(cmd.target == 2);
  }
}

TEST_CASE("deadline margin diagnostic") {
  const auto p = testref::params();
  const auto spec = ControllerSpec::adaptive(p);

  auto o = obs_at(25.0, green(1, 0.0));
  CHECK(deadline_miss_margin(spec, o) == std::numeric_limits<double>::infinity());

  o.zone[1].push_back({2, spec.deadline_s - spec.switch_margin_s, -1.0, 0.0});
  CHECK(std::abs(deadline_miss_margin(spec, o)) < 1e-12);

  o.zone[1][0].wait_age = 20.0;
  const double expect = d_max(p) - p.signal.yellow_s - departure_time(p, 1).total_s - 20.0;
  CHECK(std::abs(deadline_miss_margin(spec, o) - expect) < 1e-9);
  CHECK(std::abs(expect - 5.92) < 0.01);

  const auto fixed = ControllerSpec::fixed_cycle_1(p);
  CHECK_THROWS_AS(deadline_miss_margin(fixed, o), std::domain_error);
}

TEST_CASE("fixed cycle decisions") {
  const auto p = testref::params();
  const auto c1 = ControllerSpec::fixed_cycle_1(p);
  const double t_n = departure_time(p, p.geometry.queue_capacity).total_s;
  CHECK(c1.green1_s == t_n);
  CHECK(c1.green2_s == t_n);

  SECTION("switches exactly when the green has run its course") {
    auto before = obs_at(t_n - 0.01, green(1, 0.0));
    CHECK(decide(c1, before).kind == Command::Kind::hold);
    auto due = obs_at(t_n, green(1, 0.0));
    const auto cmd = decide(c1, due);
    CHECK(cmd.kind == Command::Kind::begin_switch);
    CHECK(cmd.target == 2);
    CHECK(cmd.reason == Command::Reason::cycle);
  }

  SECTION("timing ignores traffic") {
    auto o = obs_at(t_n, green(2, 0.0));
    o.zone[0].push_back({1, 200.0, 0.0, 0.0});  // long-overdue car changes nothing
    const auto cmd = decide(c1, o);
    CHECK(cmd.kind == Command::Kind::begin_switch);
    CHECK(cmd.target == 1);
  }

  SECTION("asymmetric variant shortens queue 1's green") {
    const auto c2 = ControllerSpec::fixed_cycle_2(p, 0.25);
    CHECK(std::abs(c2.green1_s - 0.25 * t_n) < 1e-12);
    CHECK(c2.green2_s == t_n);
    CHECK_THROWS_AS(ControllerSpec::fixed_cycle_2(p, 0.0), std::domain_error);
    CHECK_THROWS_AS(ControllerSpec::fixed_cycle_2(p, 1.5), std::domain_error);
  }

  SECTION("all-red start turns a green on") {
    LightPhase l;
    CHECK(decide(c1, obs_at(0.0, l)).kind == Command::Kind::begin_switch);
  }
}

TEST_CASE("fixed-cycle phase changes form an arithmetic progression") {
  const auto p = testref::params();
  const SimConfig cfg{0.01, 3600.0, 1};
  const double t_n = departure_time(p, p.geometry.queue_capacity).total_s;

  std::vector<double> onsets_by_seed[2];
  int which = 0;
  for (std::uint64_t seed : {11ULL, 99ULL}) {
    const auto scenario = generate_scenario(p, 30, 60, 4.0, 8.0, seed);
    const auto result = run(p, scenario, ControllerSpec::fixed_cycle_1(p), cfg);
    REQUIRE(result.liveness_ok);
    std::vector<double>& onsets = onsets_by_seed[which++];
    for (const auto& e : result.events)
      if (e.kind == EventKind::phase_green) onsets.push_back(e.t);
    REQUIRE(onsets.size() >= 3);
    const double diff0 = onsets[1] - onsets[0];
    for (std::size_t i = 1; i + 1 < onsets.size(); ++i)
      CHECK(std::abs((onsets[i + 1] - onsets[i]) - diff0) < 1e-9);
    CHECK(std::abs(diff0 - (t_n + p.signal.yellow_s)) <= cfg.dt + 1e-9);
  }
  // Identical timestamps across different traffic.
  const auto n = std::min(onsets_by_seed[0].size(), onsets_by_seed[1].size());
  for (std::size_t i = 0; i < n; ++i)
    CHECK(onsets_by_seed[0][i] == onsets_by_seed[1][i]);
}

TEST_CASE("adaptive controller is work conserving") {
  const auto p = testref::params();
  const SimConfig cfg{0.01, 3600.0, 1};
  const auto scenario = generate_scenario(p, 6, 12, 6.0, 40.0, 5);
  Simulation sim(p, scenario, ControllerSpec::adaptive(p), cfg);

  double wasted = 0.0;
  double max_wasted = 0.0;
  while (!sim.all_departed() && sim.world().now() < 1200.0) {
    const auto o = sim.observe();
    const bool green_idle = o.light.kind == PhaseKind::green &&
                            o.zone[o.light.green_dir - 1].empty() && !o.box_occupied[0] &&
                            !o.box_occupied[1];
    const int other = o.light.green_dir == 1 ? 2 : 1;
    if (green_idle && !o.zone[other - 1].empty()) {
      wasted += cfg.dt;
      max_wasted = std::max(max_wasted, wasted);
    } else {
      wasted = 0.0;
    }
    sim.step();
  }
  REQUIRE(sim.all_departed());
  CHECK(max_wasted <= cfg.dt + 1e-9);
}

TEST_CASE("deadline switches are sound in a saturated run") {
  const auto p = testref::params();
  const SimConfig cfg{0.01, 3600.0, 1};
  const auto spec = ControllerSpec::adaptive(p);
  Simulation sim(p, saturated_scenario(p), spec, cfg);

  int deadline_switches = 0;
  while (!sim.all_departed() && sim.world().now() < 600.0) {
    const auto o = sim.observe();
    const auto cmd = decide(spec, o);
    if (cmd.kind == Command::Kind::begin_switch && cmd.reason == Command::Reason::deadline) {
      double max_age = -1.0;
      for (int q = 1; q <= 2; ++q) {
        if (o.light.kind == PhaseKind::green && o.light.green_dir == q) continue;
        for (const auto& c : o.zone[q - 1]) max_age = std::max(max_age, c.wait_age);
      }
      CHECK(max_age >= spec.deadline_s - spec.switch_margin_s - 1e-9);
      deadline_switches += 1;
    }
    sim.step();
  }
  REQUIRE(sim.all_departed());
  CHECK(deadline_switches > 0);
}
