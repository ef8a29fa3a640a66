#pragma once

#include "crossing/tolerances.hpp"

namespace crossing {

enum class PhaseKind { green, yellow, all_red };

// Signal state shared by the engine and the controllers. At most one
// direction is non-red; a switch always routes through one full yellow.
struct LightPhase {
  PhaseKind kind = PhaseKind::all_red;
  int green_dir = 0;    // 1 or 2 while kind == green, else 0
  int pending_dir = 0;  // switch target while kind == yellow, else 0
  double phase_start = 0.0;

  bool may_enter(int queue) const { return kind == PhaseKind::green && green_dir == queue; }
};

// Requests a switch toward `target`. Ignored while a yellow is in progress or
// when `target` already holds the green. From all-red the green is immediate;
// from a green the yellow starts now and the machine finishes the switch.
inline bool begin_switch(LightPhase& light, int target, double now) {
  if (light.kind == PhaseKind::yellow) return false;
  if (light.kind == PhaseKind::green) {
    if (light.green_dir == target) return false;
    light.kind = PhaseKind::yellow;
    light.pending_dir = target;
    light.green_dir = 0;
    light.phase_start = now;
    return true;
  }
  light.kind = PhaseKind::green;
  light.green_dir = target;
  light.pending_dir = 0;
  light.phase_start = now;
  return true;
}

// Finishes a due yellow. The new green is stamped with the exact scheduled
// change time, not the step time, so phase timelines do not drift with dt.
inline bool advance_phase(LightPhase& light, double now, double yellow_s) {
  if (light.kind != PhaseKind::yellow) return false;
  const double due = light.phase_start + yellow_s;
  if (now + tol::time_eq < due) return false;
  light.kind = PhaseKind::green;
  light.green_dir = light.pending_dir;
  light.pending_dir = 0;
  light.phase_start = due;
  return true;
}

}  // namespace crossing
