#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "crossing/phase.hpp"

namespace crossing {

enum class Motion { free, following, stopped, launching, crossing, departed };

// One vehicle on a queue axis: stop line at 0, upstream negative, the
// intersection box spans (0, L_I]. Positions refer to the front bumper.
struct Car {
  int id = 0;
  int queue = 1;  // 1 or 2
  double front_pos = 0.0;
  double vel = 0.0;
  Motion motion = Motion::stopped;

  // Free-motion profile anchor: while unconstrained the car follows
  // v(t) = min(v_max, K - (K - anchor_vel) e^{-a (t - anchor_t)}).
  // The anchor resets whenever a constraint overrides the profile.
  double anchor_t = 0.0;
  double anchor_vel = 0.0;
  double anchor_pos = 0.0;

  double t_enter_zone = -1.0;  // first instant front_pos >= -L_Q, -1 = unset
  double t_depart = -1.0;      // first instant front_pos >= +L_I, -1 = unset
  double launch_origin = -1.0;  // time the most recent start rule fired
  bool entered_box = false;
  bool born_in_zone = false;  // placed inside the zone, so it skips part of it

  bool in_zone() const { return t_enter_zone >= 0.0; }
  bool departed() const { return t_depart >= 0.0; }
  double sojourn() const { return t_depart - t_enter_zone; }
};

struct SimConfig {
  double dt = 0.01;
  double max_t = 3600.0;
  int initial_green = 1;  // 1, 2, or 0 for all-red start
};

struct World {
  long long step_count = 0;
  double dt = 0.01;
  std::array<std::vector<Car>, 2> queues;  // index 0 = queue 1; head car first
  LightPhase light;

  double now() const { return static_cast<double>(step_count) * dt; }
};

}  // namespace crossing
