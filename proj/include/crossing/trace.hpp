#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace crossing {

enum class EventKind {
  enter_zone,
  launch,
  stop,
  enter_box,
  depart,
  phase_green,
  phase_yellow,
};

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::enter_zone: return "enter_zone";
    case EventKind::launch: return "launch";
    case EventKind::stop: return "stop";
    case EventKind::enter_box: return "enter_box";
    case EventKind::depart: return "depart";
    case EventKind::phase_green: return "phase_green";
    case EventKind::phase_yellow: return "phase_yellow";
  }
  return "?";
}

// One trace record. For phase events car_id is -1, queue is the direction the
// event concerns (new green holder / switch target), position and velocity 0.
struct Event {
  double t = 0.0;
  EventKind kind = EventKind::enter_zone;
  int car_id = -1;
  int queue = 0;
  double position = 0.0;
  double velocity = 0.0;
};

// Line format, one record per line, space separated:
//   <t> <event_kind> <car_id> <queue> <position> <velocity>
// with t, position, velocity printed at fixed 4-decimal precision.
inline std::string format_line(const Event& e) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.4f %s %d %d %.4f %.4f", e.t, to_string(e.kind), e.car_id,
                e.queue, e.position, e.velocity);
  return buf;
}

inline void write_trace(std::ostream& os, const std::vector<Event>& events) {
  for (const auto& e : events) os << format_line(e) << '\n';
}

}  // namespace crossing
