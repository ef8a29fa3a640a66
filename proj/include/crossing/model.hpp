#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "crossing/tolerances.hpp"

namespace crossing {

// First-order longitudinal car model: mass driven by a constant force against
// linear drag. The closed-form speed profile approaches the terminal speed
// F/c1 with rate constant c1/m.
struct VehicleDynamics {
  double mass_kg = 0.0;        // m
  double drive_force_n = 0.0;  // F
  double drag_coeff = 0.0;     // c1, N*s/m

  double terminal_speed = 0.0;  // derived: F/c1
  double response_rate = 0.0;   // derived: c1/m, 1/s

  static VehicleDynamics from(double mass_kg, double drive_force_n, double drag_coeff) {
    VehicleDynamics d;
    d.mass_kg = mass_kg;
    d.drive_force_n = drive_force_n;
    d.drag_coeff = drag_coeff;
    d.terminal_speed = drive_force_n / drag_coeff;
    d.response_rate = drag_coeff / mass_kg;
    return d;
  }
};

// Intersection layout. The queue zone is the stretch upstream of the stop
// line within communication range; it holds at most `queue_capacity` stopped
// cars at the static safe spacing.
struct Geometry {
  double car_length = 0.0;           // L_C
  double intersection_length = 0.0;  // L_I
  double queue_zone_length = 0.0;    // L_Q
  double safe_gap = 0.0;             // d_S, bumper-to-bumper clearance at rest

  int queue_capacity = 0;  // derived: L_Q / (L_C + d_S)

  static Geometry from(double car_length, double intersection_length,
                       double queue_zone_length, double safe_gap) {
    Geometry g;
    g.car_length = car_length;
    g.intersection_length = intersection_length;
    g.queue_zone_length = queue_zone_length;
    g.safe_gap = safe_gap;
    const double slot = car_length + safe_gap;
    g.queue_capacity = slot > 0.0 ? static_cast<int>(std::llround(queue_zone_length / slot)) : 0;
    return g;
  }

  // Front-to-front spacing of two stopped cars.
  double slot_length() const { return car_length + safe_gap; }
};

struct SpeedLimits {
  double v_max = 0.0;   // legal speed limit near the intersection
  double v_safe = 0.0;  // predecessor speed at which a stopped follower launches
};

struct SignalTiming {
  double yellow_s = 0.0;  // T_Y
};

struct ModelParams {
  VehicleDynamics dynamics;
  Geometry geometry;
  SpeedLimits speeds;
  SignalTiming signal;

  // Throwing factory: aggregates the parts and refuses invalid combinations.
  static ModelParams validated(VehicleDynamics dyn, Geometry geo, SpeedLimits spd,
                               SignalTiming sig);
};

// ---------------------------------------------------------------------------
// Closed-form kinematics of the reduced model  m*v' + c1*v = F.
// ---------------------------------------------------------------------------

/// Speed after accelerating for `t` seconds from initial speed `v0`:
/// K - (K - v0) * exp(-a t). With v0 = 0 this is the textbook ramp K(1-e^{-at}).
inline double velocity_at(const VehicleDynamics& dyn, double v0, double t) {
  if (t < 0.0) throw std::domain_error("velocity_at: negative time");
  if (v0 < 0.0 || v0 > dyn.terminal_speed)
    throw std::domain_error("velocity_at: initial speed outside [0, K]");
  const double K = dyn.terminal_speed;
  return K - (K - v0) * std::exp(-dyn.response_rate * t);
}

/// Distance covered in `t` seconds starting from rest:
/// K t - (K/a)(1 - e^{-a t}).
inline double distance_at(const VehicleDynamics& dyn, double t) {
  if (t < 0.0) throw std::domain_error("distance_at: negative time");
  const double K = dyn.terminal_speed;
  const double a = dyn.response_rate;
  return K * t - (K / a) * (1.0 - std::exp(-a * t));
}

/// Time to accelerate from rest to speed `v` (< K):
/// (1/a)[ln K - ln(K - v)].
inline double time_to_speed(const VehicleDynamics& dyn, double v) {
  if (v < 0.0) throw std::domain_error("time_to_speed: negative target speed");
  if (v >= dyn.terminal_speed) throw std::domain_error("time_to_speed: target speed unreachable");
  const double K = dyn.terminal_speed;
  return (std::log(K) - std::log(K - v)) / dyn.response_rate;
}

/// Speed after `t` seconds from initial speed `v0`, clipped at `cap` (a road
/// speed limit the driver will not exceed).
inline double capped_velocity(const VehicleDynamics& dyn, double v0, double t, double cap) {
  return std::min(cap, velocity_at(dyn, std::min(v0, dyn.terminal_speed), t));
}

/// Distance covered from rest in `t` seconds with the speed clipped at `cap`:
/// the closed-form ramp up to the cap, then cruise.
inline double capped_distance_from_rest(const VehicleDynamics& dyn, double t, double cap) {
  const double t_cap = time_to_speed(dyn, cap);
  if (t <= t_cap) return distance_at(dyn, t);
  return distance_at(dyn, t_cap) + cap * (t - t_cap);
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// Checks every model assumption and returns the full list of violations
/// (empty when the parameter set is usable).
inline std::vector<std::string> validate(const ModelParams& p) {
  std::vector<std::string> out;
  const auto& d = p.dynamics;
  const auto& g = p.geometry;
  const auto& s = p.speeds;

  if (!(d.mass_kg > 0.0)) out.push_back("mass must be positive");
  if (!(d.drive_force_n > 0.0)) out.push_back("drive force must be positive");
  if (!(d.drag_coeff > 0.0)) out.push_back("drag coefficient must be positive");

  if (!(g.car_length > 0.0)) out.push_back("car length must be positive");
  if (!(g.intersection_length > 0.0)) out.push_back("intersection length must be positive");
  if (!(g.queue_zone_length > 0.0)) out.push_back("queue zone length must be positive");
  if (!(g.safe_gap > 0.0)) out.push_back("safe gap must be positive");

  const double slot = g.slot_length();
  if (slot > 0.0 && g.queue_zone_length > 0.0) {
    const double n = g.queue_zone_length / slot;
    if (std::abs(n - std::llround(n)) > 1e-9 * std::max(1.0, n) || std::llround(n) < 1)
      out.push_back("queue zone length must be a positive integer multiple of car length + safe gap");
  }

  const bool dyn_ok = d.mass_kg > 0.0 && d.drive_force_n > 0.0 && d.drag_coeff > 0.0;
  if (!(s.v_safe > 0.0)) out.push_back("safe velocity must be positive");
  if (!(s.v_safe <= s.v_max)) out.push_back("safe velocity must not exceed the speed limit");
  if (dyn_ok && !(s.v_max < d.terminal_speed))
    out.push_back("speed limit must be below the terminal speed F/c1");

  if (!(p.signal.yellow_s > 1.0)) out.push_back("yellow duration must exceed one second");

  if (dyn_ok && s.v_max > 0.0 && s.v_max < d.terminal_speed) {
    // Ramp-up distance to v_max must fit inside the intersection.
    const double t_a = time_to_speed(d, s.v_max);
    const double ramp = d.terminal_speed * t_a - s.v_max / d.response_rate;
    if (ramp > g.intersection_length + tol::invariant)
      out.push_back("intersection too short for a standing car to reach the speed limit inside it");
    // The incremental cruise term must fit inside one yellow.
    if (slot / s.v_max > p.signal.yellow_s + tol::invariant)
      out.push_back("slot travel time (L_C+d_S)/V_max must not exceed the yellow duration");
  }

  return out;
}

inline ModelParams ModelParams::validated(VehicleDynamics dyn, Geometry geo, SpeedLimits spd,
                                          SignalTiming sig) {
  ModelParams p{dyn, geo, spd, sig};
  const auto violations = validate(p);
  if (!violations.empty()) {
    std::string msg = "invalid model parameters:";
    for (const auto& v : violations) msg += "\n  - " + v;
    throw std::invalid_argument(msg);
  }
  return p;
}

}  // namespace crossing
