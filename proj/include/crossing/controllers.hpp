#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "crossing/bounds.hpp"
#include "crossing/model.hpp"
#include "crossing/phase.hpp"

namespace crossing {

// What a controller is allowed to see: only cars inside the communication
// zone [-L_Q, +L_I), the signal state, and intersection-box occupancy.
struct ObservedCar {
  int id = 0;
  double wait_age = 0.0;  // t - t_enter_zone
  double front_pos = 0.0;
  double vel = 0.0;
};

struct Observation {
  double t = 0.0;
  LightPhase light;
  std::array<std::vector<ObservedCar>, 2> zone;  // per queue, head first
  std::array<bool, 2> box_occupied{false, false};
};

struct Command {
  enum class Kind { hold, begin_switch };
  enum class Reason { none, idle, deadline, cycle };
  Kind kind = Kind::hold;
  int target = 0;
  Reason reason = Reason::none;

  static Command hold() { return {}; }
  static Command sw(int target, Reason reason) {
    return {Kind::begin_switch, target, reason};
  }
};

enum class ControllerKind { adaptive_deadline, fixed_cycle_1, fixed_cycle_2 };

inline const char* to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::adaptive_deadline: return "adaptive_deadline";
    case ControllerKind::fixed_cycle_1: return "fixed_cycle_1";
    case ControllerKind::fixed_cycle_2: return "fixed_cycle_2";
  }
  return "?";
}

inline ControllerKind controller_kind_from(const std::string& name) {
  if (name == "adaptive_deadline" || name == "adaptive") return ControllerKind::adaptive_deadline;
  if (name == "fixed_cycle_1" || name == "fixed1") return ControllerKind::fixed_cycle_1;
  if (name == "fixed_cycle_2" || name == "fixed2") return ControllerKind::fixed_cycle_2;
  throw std::domain_error("unknown controller kind: " + name);
}

// Fully resolved controller parameters. Controllers are pure functions of
// (spec, observation); everything they need is resolved up front.
struct ControllerSpec {
  ControllerKind kind = ControllerKind::adaptive_deadline;

  // adaptive_deadline
  double deadline_s = 0.0;      // per-car sojourn budget D
  double switch_margin_s = 0.0;  // lead time needed to honor D: one yellow + T_1

  // fixed cycles: resolved green duration per direction
  double green1_s = 0.0;
  double green2_s = 0.0;

  double ratio = 1.0;            // fixed_cycle_2 asymmetry, kept for reporting
  bool yellow_included = false;  // cycle length counts the yellow

  static ControllerSpec adaptive(const ModelParams& p,
                                 double deadline_s = std::numeric_limits<double>::quiet_NaN(),
                                 double margin_s = std::numeric_limits<double>::quiet_NaN()) {
    ControllerSpec s;
    s.kind = ControllerKind::adaptive_deadline;
    s.deadline_s = std::isnan(deadline_s) ? d_max(p) : deadline_s;
    s.switch_margin_s = std::isnan(margin_s)
                            ? p.signal.yellow_s + departure_time(p, 1).total_s
                            : margin_s;
    if (s.deadline_s < d_min(p))
      throw std::domain_error("adaptive controller: deadline below d_min");
    return s;
  }

  static ControllerSpec fixed_cycle_1(const ModelParams& p,
                                      double green_s = std::numeric_limits<double>::quiet_NaN(),
                                      bool yellow_included = false) {
    ControllerSpec s;
    s.kind = ControllerKind::fixed_cycle_1;
    const double base =
        std::isnan(green_s) ? departure_time(p, p.geometry.queue_capacity).total_s : green_s;
    const double g = yellow_included ? std::max(base - p.signal.yellow_s, p.signal.yellow_s) : base;
    s.green1_s = g;
    s.green2_s = g;
    s.yellow_included = yellow_included;
    return s;
  }

  static ControllerSpec fixed_cycle_2(const ModelParams& p, double ratio,
                                      double green_s = std::numeric_limits<double>::quiet_NaN(),
                                      bool yellow_included = false) {
    if (!(ratio > 0.0 && ratio <= 1.0))
      throw std::domain_error("fixed_cycle_2: ratio must be in (0, 1]");
    ControllerSpec s;
    s.kind = ControllerKind::fixed_cycle_2;
    const double base =
        std::isnan(green_s) ? departure_time(p, p.geometry.queue_capacity).total_s : green_s;
    const double g2 = yellow_included ? std::max(base - p.signal.yellow_s, p.signal.yellow_s) : base;
    s.green1_s = ratio * g2;
    s.green2_s = g2;
    s.ratio = ratio;
    s.yellow_included = yellow_included;
    return s;
  }
};

namespace detail {

// Queue (1 or 2) whose visible head car is closest to the stop line, or 0
// when both zones are empty. Ties go to the lower queue index.
inline int closest_waiting_queue(const Observation& obs) {
  int best = 0;
  double best_pos = -std::numeric_limits<double>::infinity();
  for (int q = 1; q <= 2; ++q) {
    const auto& cars = obs.zone[q - 1];
    if (cars.empty()) continue;
    double head = -std::numeric_limits<double>::infinity();
    for (const auto& c : cars) head = std::max(head, c.front_pos);
    if (head > best_pos) {
      best_pos = head;
      best = q;
    }
  }
  return best;
}

inline double max_unserved_wait_age(const Observation& obs, int* queue_out = nullptr) {
  double best = -std::numeric_limits<double>::infinity();
  if (queue_out) *queue_out = 0;
  for (int q = 1; q <= 2; ++q) {
    if (obs.light.kind == PhaseKind::green && obs.light.green_dir == q) continue;
    for (const auto& c : obs.zone[q - 1]) {
      if (c.wait_age > best) {
        best = c.wait_age;
        if (queue_out) *queue_out = q;
      }
    }
  }
  return best;
}

}  // namespace detail

/// One decision step. Pure function: all state the controller may use is in
/// the spec and the observation.
inline Command decide(const ControllerSpec& spec, const Observation& obs) {
  const LightPhase& light = obs.light;
  if (light.kind == PhaseKind::yellow) return Command::hold();  // switch in progress

  switch (spec.kind) {
    case ControllerKind::adaptive_deadline: {
      const bool green_zone_empty =
          light.kind != PhaseKind::green || obs.zone[light.green_dir - 1].empty();
      const bool not_busy = green_zone_empty && !obs.box_occupied[0] && !obs.box_occupied[1];
      if (not_busy) {
        const int target = detail::closest_waiting_queue(obs);
        if (target != 0 && target != light.green_dir) return Command::sw(target, Command::Reason::idle);
      }
      int q = 0;
      const double age = detail::max_unserved_wait_age(obs, &q);
      if (q != 0 && age >= spec.deadline_s - spec.switch_margin_s - tol::time_eq)
        return Command::sw(q, Command::Reason::deadline);
      return Command::hold();
    }
    case ControllerKind::fixed_cycle_1:
    case ControllerKind::fixed_cycle_2: {
      if (light.kind == PhaseKind::all_red) return Command::sw(1, Command::Reason::cycle);
      const double green_len = light.green_dir == 1 ? spec.green1_s : spec.green2_s;
      if (obs.t - light.phase_start >= green_len - tol::time_eq)
        return Command::sw(light.green_dir == 1 ? 2 : 1, Command::Reason::cycle);
      return Command::hold();
    }
  }
  return Command::hold();
}

/// Diagnostic for the adaptive trigger: distance (in seconds) to the deadline
/// switch; negative means the trigger already fired, +inf means no pending
/// deadline on the red direction.
inline double deadline_miss_margin(const ControllerSpec& spec, const Observation& obs) {
  if (spec.kind != ControllerKind::adaptive_deadline)
    throw std::domain_error("deadline_miss_margin: controller has no deadline");
  int q = 0;
  const double age = detail::max_unserved_wait_age(obs, &q);
  if (q == 0) return std::numeric_limits<double>::infinity();
  return spec.deadline_s - spec.switch_margin_s - age;
}

}  // namespace crossing
