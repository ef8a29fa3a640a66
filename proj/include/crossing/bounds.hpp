#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "crossing/model.hpp"

namespace crossing {

// Three-part decomposition of the time a queued car needs to clear the
// intersection once its queue gets a green light and keeps it: wait for the
// launch chain, own ramp-up, cruise through the remaining distance.
struct DelayDecomposition {
  int position = 0;     // 1 = at the stop line
  double wait_s = 0.0;  // (position-1) launch-chain intervals
  double ramp_s = 0.0;  // time to accelerate from rest to v_max
  double cruise_s = 0.0;
  double total_s = 0.0;
};

struct BoundsReport {
  double d_min_s = 0.0;
  double d_max_s = 0.0;
  double first_car_s = 0.0;      // T_1
  double last_car_s = 0.0;       // T_N
  double launch_interval_s = 0.0;  // per-car launch-chain delay
  double slot_cruise_s = 0.0;      // per-car extra cruise time
  double service_rate = 0.0;       // cars/s through a green at v_max
};

/// Launch-chain interval: time for a freshly launched car to reach the safe
/// velocity, i.e. the delay between consecutive launches in a stopped queue.
inline double delta_t_w(const ModelParams& p) {
  return time_to_speed(p.dynamics, p.speeds.v_safe);
}

/// Extra cruise time per queue position: one stopped-car slot at full speed.
inline double delta_t_t(const ModelParams& p) {
  return p.geometry.slot_length() / p.speeds.v_max;
}

/// Distance covered while ramping from rest to v_max.
inline double ramp_distance(const ModelParams& p) {
  const double t_a = time_to_speed(p.dynamics, p.speeds.v_max);
  return p.dynamics.terminal_speed * t_a - p.speeds.v_max / p.dynamics.response_rate;
}

/// Time for the car in queue position `i` (1 = at the stop line) to clear the
/// intersection under an uninterrupted green, decomposed into wait/ramp/cruise.
inline DelayDecomposition departure_time(const ModelParams& p, int i) {
  if (i < 1 || i > p.geometry.queue_capacity)
    throw std::domain_error("departure_time: queue position out of range");
  DelayDecomposition d;
  d.position = i;
  d.wait_s = (i - 1) * delta_t_w(p);
  d.ramp_s = time_to_speed(p.dynamics, p.speeds.v_max);
  const double first_cruise =
      (p.geometry.intersection_length - ramp_distance(p)) / p.speeds.v_max;
  d.cruise_s = (i - 1) * delta_t_t(p) + first_cruise;
  d.total_s = d.wait_s + d.ramp_s + d.cruise_s;
  return d;
}

/// Extra total service time caused by splitting `i` queued cars over the
/// green periods of an ordered composition instead of one green:
/// (M-1) * [(T_1a - dTw) + (T_1t - dTt) + T_Y] for an M-part composition.
/// Nonnegative under the model invariants; zero only for a single part.
inline double green_split_penalty(const ModelParams& p, int i,
                                  const std::vector<int>& partition) {
  if (partition.empty()) throw std::domain_error("green_split_penalty: empty partition");
  long long sum = 0;
  for (int part : partition) {
    if (part < 1) throw std::domain_error("green_split_penalty: parts must be positive");
    sum += part;
  }
  if (sum != i) throw std::domain_error("green_split_penalty: parts must sum to i");
  if (i < 1 || i > p.geometry.queue_capacity)
    throw std::domain_error("green_split_penalty: car count out of range");

  const auto first = departure_time(p, 1);
  const double per_extra_green = (first.ramp_s - delta_t_w(p)) +
                                 (first.cruise_s - delta_t_t(p)) + p.signal.yellow_s;
  return (static_cast<int>(partition.size()) - 1) * per_extra_green;
}

/// Sojourn of the i-th car waiting outside a full queue when the green turns
/// on, given the time `enter_queue_s` it needs to roll into the zone after its
/// launch: 2 T_N + 2 T_Y - (N+i-1) dTw - enter_queue_s + T_i.
inline double outside_car_sojourn(const ModelParams& p, int i, double enter_queue_s) {
  if (i < 1) throw std::domain_error("outside_car_sojourn: position must be positive");
  if (enter_queue_s < 0.0) throw std::domain_error("outside_car_sojourn: negative entry time");
  const int n = p.geometry.queue_capacity;
  const double t_n = departure_time(p, n).total_s;
  const double t_i = departure_time(p, std::min(i, n)).total_s +
                     (i > n ? (i - n) * (delta_t_w(p) + delta_t_t(p)) : 0.0);
  return 2.0 * t_n + 2.0 * p.signal.yellow_s - (n + i - 1) * delta_t_w(p) -
         enter_queue_s + t_i;
}

/// Best case: enter the zone at full speed and never slow down.
inline double d_min(const ModelParams& p) {
  return (p.geometry.queue_zone_length + p.geometry.intersection_length) / p.speeds.v_max;
}

/// Worst case under the serve-all-N policy in saturated traffic:
/// 2 T_N + 2 T_Y - N dTw + T_1 (the head car of the refill batch).
inline double d_max(const ModelParams& p) {
  return outside_car_sojourn(p, 1, 0.0);
}

/// Saturation flow through the intersection: a platoon at v_max with the
/// static safe spacing between consecutive cars.
inline double mu_max(const ModelParams& p) {
  return p.speeds.v_max / p.geometry.slot_length();
}

inline BoundsReport bounds_report(const ModelParams& p) {
  BoundsReport r;
  r.d_min_s = d_min(p);
  r.d_max_s = d_max(p);
  r.first_car_s = departure_time(p, 1).total_s;
  r.last_car_s = departure_time(p, p.geometry.queue_capacity).total_s;
  r.launch_interval_s = delta_t_w(p);
  r.slot_cruise_s = delta_t_t(p);
  r.service_rate = mu_max(p);
  return r;
}

}  // namespace crossing
