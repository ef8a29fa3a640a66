#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "crossing/bounds.hpp"
#include "crossing/controllers.hpp"
#include "crossing/model.hpp"
#include "crossing/result.hpp"
#include "crossing/scenario.hpp"
#include "crossing/trace.hpp"
#include "crossing/world.hpp"

namespace crossing {

// Raised when a step would violate a physical invariant (overlap, reordering,
// speed box). Indicates an engine defect, never a property of the scenario.
struct SimulationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fixed-step simulator of the two-queue intersection.
//
// Motion model: a moving car follows its anchored closed-form speed profile
// capped at v_max. Launches from rest are anchored at the exact instant the
// start rule fired (green onset, or the predecessor's closed-form crossing of
// the safe velocity), so chained departures carry no per-step quantization.
// Stopping is instantaneous: the car is placed exactly at the binding
// constraint (stop line, or the safe stopped spacing behind its predecessor)
// in the step where free motion would violate it.
class Simulation {
 public:
  Simulation(ModelParams params, const Scenario& scenario, ControllerSpec controller,
             SimConfig config)
      : p_(std::move(params)),
        ctrl_(controller),
        cfg_(config),
        d_min_(d_min(p_)),
        slot_(p_.geometry.slot_length()) {
    world_.dt = cfg_.dt;
    if (cfg_.initial_green == 1 || cfg_.initial_green == 2) {
      // Initial state, not an event: the manifest records initial_green.
      world_.light.kind = PhaseKind::green;
      world_.light.green_dir = cfg_.initial_green;
      world_.light.phase_start = 0.0;
    }
    int next_id = 0;
    for (int q = 0; q < 2; ++q) {
      auto& cars = world_.queues[q];
      cars.reserve(scenario.cars[q].size());
      for (const auto& placed : scenario.cars[q]) {
        Car c;
        c.id = next_id++;
        c.queue = q + 1;
        c.front_pos = placed.front_pos;
        c.vel = placed.vel;
        c.anchor_t = 0.0;
        c.anchor_vel = placed.vel;
        c.anchor_pos = placed.front_pos;
        c.motion = placed.vel > 0.0 ? Motion::free : Motion::stopped;
        if (c.front_pos >= -p_.geometry.queue_zone_length - tol::invariant) {
          c.t_enter_zone = 0.0;
          c.born_in_zone = true;
          events_.push_back({0.0, EventKind::enter_zone, c.id, c.queue, c.front_pos, c.vel});
        }
        cars.push_back(c);
      }
      total_cars_ += static_cast<int>(cars.size());
    }
    check_invariants(0.0);
  }

  const World& world() const { return world_; }
  const ModelParams& params() const { return p_; }

  // Controller view of the current state: zone-restricted car lists plus
  // box occupancy. Nothing outside the communication range leaks through.
  Observation observe() const {
    Observation obs;
    obs.t = world_.now();
    obs.light = world_.light;
    for (int q = 0; q < 2; ++q) {
      for (const auto& c : world_.queues[q]) {
        if (!c.departed() && c.front_pos >= -p_.geometry.queue_zone_length - tol::invariant) {
          obs.zone[q].push_back({c.id, obs.t - c.t_enter_zone, c.front_pos, c.vel});
        }
        if (c.front_pos > 0.0 && c.front_pos - p_.geometry.car_length <
                                     p_.geometry.intersection_length)
          obs.box_occupied[q] = true;
      }
    }
    return obs;
  }

  // One dt of simulated time: finish a due yellow, consult the controller,
  // move every car head-to-tail, record events, check invariants.
  void step() {
    const double t0 = world_.now();
    const double t1 = static_cast<double>(world_.step_count + 1) * world_.dt;

    if (advance_phase(world_.light, t0, p_.signal.yellow_s)) {
      events_.push_back(
          {world_.light.phase_start, EventKind::phase_green, -1, world_.light.green_dir, 0.0, 0.0});
    }

    const Command cmd = decide(ctrl_, observe());
    if (cmd.kind == Command::Kind::begin_switch &&
        begin_switch(world_.light, cmd.target, t0)) {
      switches_.push_back({t0, cmd.target, cmd.reason});
      const EventKind kind = world_.light.kind == PhaseKind::yellow ? EventKind::phase_yellow
                                                                    : EventKind::phase_green;
      events_.push_back({t0, kind, -1, cmd.target, 0.0, 0.0});
    }

    for (int q = 0; q < 2; ++q) {
      Car* pred = nullptr;
      for (auto& car : world_.queues[q]) {
        update_car(car, pred, q + 1, t0, t1);
        pred = &car;
      }
    }

    world_.step_count += 1;
    check_invariants(t1);
  }

  bool all_departed() const { return departed_cars_ == total_cars_; }

  // Runs to completion (all cars departed) or to the horizon. A horizon hit
  // is reported as a liveness failure, not an error.
  SimResult run() {
    while (!all_departed() && world_.now() < cfg_.max_t - tol::time_eq) step();

    SimResult r;
    r.end_t = world_.now();
    double sum = 0.0;
    int departed = 0;
    for (int q = 0; q < 2; ++q) {
      for (const auto& c : world_.queues[q]) {
        CarRecord rec{c.id, c.queue, c.t_enter_zone, c.t_depart,
                      c.departed() ? c.sojourn() : -1.0};
        r.cars.push_back(rec);
        if (c.departed()) {
          sum += rec.sojourn;
          departed += 1;
          r.queue_max[q] = std::max(r.queue_max[q], rec.sojourn);
        } else {
          r.stranded_ids.push_back(c.id);
        }
      }
    }
    r.liveness_ok = r.stranded_ids.empty();
    r.mean_sojourn = departed > 0 ? sum / departed : 0.0;
    int populated = 0;
    double worst_sum = 0.0;
    for (int q = 0; q < 2; ++q) {
      if (!world_.queues[q].empty()) {
        populated += 1;
        worst_sum += r.queue_max[q];
      }
    }
    r.worst_avg = populated > 0 ? worst_sum / populated : 0.0;
    std::stable_sort(events_.begin(), events_.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });
    r.events = std::move(events_);
    r.switches = std::move(switches_);
    return r;
  }

 private:
  // Exact instant the predecessor's anchored profile reaches the safe
  // velocity. Only valid once pred is moving on that profile.
  double pred_release_time(const Car& pred) const {
    const double vs = p_.speeds.v_safe;
    if (pred.anchor_vel >= vs) return pred.anchor_t;
    const double K = p_.dynamics.terminal_speed;
    return pred.anchor_t + std::log((K - pred.anchor_vel) / (K - vs)) / p_.dynamics.response_rate;
  }

  void update_car(Car& car, const Car* pred, int queue, double t0, double t1) {
    const double v_max = p_.speeds.v_max;

    if (car.motion == Motion::stopped) {
      // Release rules. A stopped car stays put until its predecessor moves at
      // the safe velocity and, at the stop line, until its direction is green.
      const bool at_line = car.front_pos > -tol::at_line;
      double origin = -std::numeric_limits<double>::infinity();
      if (at_line) {
        if (!world_.light.may_enter(queue)) return;
        origin = std::max(origin, world_.light.phase_start);
      }
      if (pred != nullptr) {
        if (pred->motion == Motion::stopped) return;
        if (pred->vel + tol::invariant < p_.speeds.v_safe) return;
        origin = std::max(origin, pred_release_time(*pred));
      }
      if (origin == -std::numeric_limits<double>::infinity()) origin = t0;
      origin = std::min(origin, t1);
      car.launch_origin = origin;
      car.anchor_t = origin;
      car.anchor_vel = 0.0;
      car.anchor_pos = car.front_pos;
      car.motion = Motion::launching;
      events_.push_back({t1, EventKind::launch, car.id, queue, car.front_pos, car.vel});
    }
    if (car.motion == Motion::stopped) return;

    // Unconstrained target from the anchored profile. From-rest profiles use
    // the exact closed-form distance; profiles with a moving anchor advance
    // by quadrature of the exact velocity over the step.
    const double tau1 = std::max(0.0, t1 - car.anchor_t);
    const double v_free = capped_velocity(p_.dynamics, car.anchor_vel, tau1, v_max);
    double new_front;
    if (car.anchor_vel == 0.0) {
      new_front = car.anchor_pos + capped_distance_from_rest(p_.dynamics, tau1, v_max);
    } else {
      const double tau0 = std::max(0.0, t0 - car.anchor_t);
      const double v0 = capped_velocity(p_.dynamics, car.anchor_vel, tau0, v_max);
      new_front = car.front_pos + 0.5 * (v0 + v_free) * (t1 - t0);
    }
    double new_vel = v_free;
    bool constrained = false;

    // Stop line: entry requires a green for this queue; a yellow or red stops
    // the car exactly at the line. Cars already past the line are never held.
    if (car.front_pos <= tol::at_line && new_front > 0.0 && !world_.light.may_enter(queue)) {
      new_front = 0.0;
      new_vel = 0.0;
      constrained = true;
    }

    // Spacing: never closer than the standing safe clearance to the (already
    // updated) predecessor; when the gap binds, match the predecessor's speed.
    if (pred != nullptr) {
      const double allowed = pred->front_pos - slot_;
      if (new_front > allowed) {
        new_front = std::max(car.front_pos, allowed);
        new_vel = std::min(new_vel, pred->vel);
        constrained = true;
      }
    }

    if (constrained) {
      car.anchor_t = t1;
      car.anchor_vel = new_vel;
      car.anchor_pos = new_front;
    }
    const Motion before = car.motion;
    car.front_pos = new_front;
    car.vel = new_vel;

    if (!car.in_zone() && new_front >= -p_.geometry.queue_zone_length - tol::invariant) {
      car.t_enter_zone = t1;
      events_.push_back({t1, EventKind::enter_zone, car.id, queue, new_front, new_vel});
    }
    if (!car.entered_box && new_front > 0.0) {
      car.entered_box = true;
      events_.push_back({t1, EventKind::enter_box, car.id, queue, new_front, new_vel});
    }
    if (!car.departed() && new_front >= p_.geometry.intersection_length) {
      car.t_depart = t1;
      departed_cars_ += 1;
      events_.push_back({t1, EventKind::depart, car.id, queue, new_front, new_vel});
      // Cars placed inside the zone skip part of it; the floor only binds
      // for full traversals.
      if (!car.born_in_zone && car.sojourn() < d_min_ - 2.0 * world_.dt - tol::invariant)
        fail(t1, "sojourn below the free-flow bound", car);
    }

    if (car.departed())
      car.motion = Motion::departed;
    else if (new_vel == 0.0) {
      car.motion = Motion::stopped;
      if (before != Motion::stopped)
        events_.push_back({t1, EventKind::stop, car.id, queue, new_front, 0.0});
    } else if (new_front > 0.0)
      car.motion = Motion::crossing;
    else if (constrained)
      car.motion = Motion::following;
    else if (car.anchor_vel == 0.0 && new_vel < v_max - tol::invariant)
      car.motion = Motion::launching;
    else
      car.motion = Motion::free;
  }

  void check_invariants(double t) const {
    for (int q = 0; q < 2; ++q) {
      const auto& cars = world_.queues[q];
      for (std::size_t i = 0; i < cars.size(); ++i) {
        const Car& c = cars[i];
        if (c.vel < -tol::invariant || c.vel > p_.speeds.v_max + tol::invariant)
          fail(t, "speed outside [0, v_max]", c);
        if (i + 1 < cars.size()) {
          const Car& next = cars[i + 1];
          if (c.front_pos - next.front_pos < p_.geometry.car_length - tol::invariant)
            fail(t, "spacing below one car length", next);
          if (next.front_pos >= c.front_pos) fail(t, "queue order violated", next);
        }
      }
    }
  }

  [[noreturn]] void fail(double t, const char* what, const Car& car) const {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "simulation invariant violated at t=%.4f: %s (car %d queue %d pos %.4f vel %.4f)",
                  t, what, car.id, car.queue, car.front_pos, car.vel);
    throw SimulationError(buf);
  }

  ModelParams p_;
  ControllerSpec ctrl_;
  SimConfig cfg_;
  double d_min_ = 0.0;
  double slot_ = 0.0;
  World world_;
  std::vector<Event> events_;
  std::vector<SwitchRecord> switches_;
  int total_cars_ = 0;
  int departed_cars_ = 0;
};

/// Convenience wrapper: build, run, return the result.
inline SimResult run(const ModelParams& params, const Scenario& scenario,
                     const ControllerSpec& controller, const SimConfig& config) {
  Simulation sim(params, scenario, controller, config);
  return sim.run();
}

}  // namespace crossing
