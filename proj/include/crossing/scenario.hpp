#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "crossing/bounds.hpp"
#include "crossing/model.hpp"
#include "crossing/rng.hpp"

namespace crossing {

struct PlacedCar {
  double front_pos = 0.0;
  double vel = 0.0;
};

// Initial condition of a run: per-queue car placements (head first) plus the
// inputs that produced them.
struct Scenario {
  std::string kind = "generated";
  int m1 = 0;
  int m2 = 0;
  double gap_lo = 0.0;  // d1
  double gap_hi = 0.0;  // d2
  double ratio = 0.0;   // m1/m2
  std::uint64_t seed = 0;
  std::array<std::vector<PlacedCar>, 2> cars;
};

/// Random initial population. Queue 2 is packed downstream-first from the
/// zone boundary with bumper-to-bumper clearances drawn from U[d1, d2];
/// queue 1 cars are placed uniformly over queue 2's extent and pushed
/// upstream where needed to restore the minimum stopped spacing. All initial
/// velocities are U[0, v_max]. Fully determined by the seed.
inline Scenario generate_scenario(const ModelParams& p, int m1, int m2, double gap_lo,
                                  double gap_hi, std::uint64_t seed) {
  if (m1 < 0 || m2 < 0 || m1 > m2) throw std::domain_error("generate_scenario: need 0 <= m1 <= m2");
  if (m2 > 0 && !(gap_lo >= p.geometry.safe_gap && gap_lo <= gap_hi))
    throw std::domain_error("generate_scenario: need d_S <= d1 <= d2");

  Scenario s;
  s.kind = "generated";
  s.m1 = m1;
  s.m2 = m2;
  s.gap_lo = gap_lo;
  s.gap_hi = gap_hi;
  s.ratio = m2 > 0 ? static_cast<double>(m1) / m2 : 0.0;
  s.seed = seed;

  Rng rng(seed);
  const double zone_edge = -p.geometry.queue_zone_length;
  const double slot = p.geometry.slot_length();

  // Queue 2 first (placements, then speeds): head at the zone boundary, one
  // clearance draw per gap. Drawing queue 2 completely before queue 1 keeps
  // it bit-identical across different m1 for the same seed.
  auto& q2 = s.cars[1];
  q2.resize(m2);
  double pos = zone_edge;
  for (int i = 0; i < m2; ++i) {
    if (i > 0) pos -= p.geometry.car_length + rng.uniform(gap_lo, gap_hi);
    q2[i].front_pos = pos;
  }
  for (auto& c : q2) c.vel = rng.uniform(0.0, p.speeds.v_max);
  const double tail = m2 > 0 ? q2.back().front_pos : zone_edge;

  // Queue 1: uniform over queue 2's extent, sorted head-first, then spacing
  // repaired by pushing upstream.
  auto& q1 = s.cars[0];
  q1.resize(m1);
  for (int i = 0; i < m1; ++i) q1[i].front_pos = rng.uniform(tail, zone_edge);
  std::sort(q1.begin(), q1.end(),
            [](const PlacedCar& a, const PlacedCar& b) { return a.front_pos > b.front_pos; });
  for (int i = 0; i < m1; ++i) {
    if (i == 0)
      q1[i].front_pos = std::min(q1[i].front_pos, zone_edge);
    else
      q1[i].front_pos = std::min(q1[i].front_pos, q1[i - 1].front_pos - slot);
  }
  for (auto& c : q1) c.vel = rng.uniform(0.0, p.speeds.v_max);
  return s;
}

/// `n` stopped cars packed in the queue-1 zone from the stop line, nothing
/// else: releasing them under an uninterrupted green reproduces the
/// closed-form departure schedule.
inline Scenario packed_queue_scenario(const ModelParams& p, int n) {
  if (n < 0 || n > p.geometry.queue_capacity)
    throw std::domain_error("packed_queue_scenario: car count exceeds zone capacity");
  Scenario s;
  s.kind = "packed_queue";
  s.m1 = n;
  s.seed = 0;
  const double slot = p.geometry.slot_length();
  auto& q1 = s.cars[0];
  q1.resize(n);
  for (int i = 0; i < n; ++i) q1[i] = {-static_cast<double>(i) * slot, 0.0};
  return s;
}

/// One car entering the zone at full speed under a permanent green: the
/// best-case sojourn.
inline Scenario free_flow_scenario(const ModelParams& p) {
  Scenario s;
  s.kind = "free_flow";
  s.m1 = 1;
  s.seed = 0;
  s.cars[0] = {PlacedCar{-p.geometry.queue_zone_length, p.speeds.v_max}};
  return s;
}

/// Saturated two-queue condition for the worst-case bound. Queue 1 feeds the
/// intersection at the saturation rate (a full-speed platoon at the stopped
/// spacing, sized so the green stays busy until the deadline trigger fires
/// and drains just after it). Queue 2 is a full zone's worth of stopped cars
/// whose launch chain refills the zone with staggered entries, exactly the
/// construction behind the worst-case formula. Under the adaptive controller
/// the head of queue 2 departs at its deadline.
inline Scenario saturated_scenario(const ModelParams& p) {
  const BoundsReport b = bounds_report(p);
  const double trigger_age = b.d_max_s - p.signal.yellow_s - b.first_car_s;
  const double line_time = p.geometry.queue_zone_length / p.speeds.v_max;
  const double box_time = p.geometry.intersection_length / p.speeds.v_max;
  const double step = b.slot_cruise_s;  // platoon headway at v_max

  // Last platoon car must clear the stop line before the trigger fires but
  // still occupy the zone when it does.
  const double margin = std::min(0.25 * box_time, 0.5);
  const int m1 = static_cast<int>(std::floor((trigger_age - margin - line_time) / step)) + 1;
  if (m1 < 1 || line_time + (m1 - 1) * step + box_time < trigger_age + margin)
    throw std::domain_error("saturated_scenario: geometry cannot keep the green busy to the trigger");

  Scenario s;
  s.kind = "saturated";
  s.m1 = m1;
  s.m2 = p.geometry.queue_capacity;
  s.gap_lo = p.geometry.safe_gap;
  s.gap_hi = p.geometry.safe_gap;
  s.ratio = s.m2 > 0 ? static_cast<double>(m1) / s.m2 : 0.0;
  s.seed = 0;

  const double slot = p.geometry.slot_length();
  const double zone_edge = -p.geometry.queue_zone_length;
  auto& q1 = s.cars[0];
  q1.resize(m1);
  for (int i = 0; i < m1; ++i) q1[i] = {zone_edge - i * slot, p.speeds.v_max};
  auto& q2 = s.cars[1];
  q2.resize(s.m2);
  for (int i = 0; i < s.m2; ++i) q2[i] = {zone_edge - i * slot, 0.0};
  return s;
}

}  // namespace crossing
