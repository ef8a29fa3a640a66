#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "crossing/controllers.hpp"
#include "crossing/trace.hpp"

#include "json.hpp"

namespace crossing {

struct CarRecord {
  int id = 0;
  int queue = 1;
  double t_enter_zone = -1.0;
  double t_depart = -1.0;
  double sojourn = -1.0;  // -1 when the car never departed
};

struct SwitchRecord {
  double t = 0.0;
  int target = 0;
  Command::Reason reason = Command::Reason::none;
};

struct SimResult {
  std::vector<CarRecord> cars;  // queue 1 records first, each queue head first
  double mean_sojourn = 0.0;    // over all departed cars
  std::array<double, 2> queue_max{0.0, 0.0};  // per-queue max sojourn, 0 if queue empty
  double worst_avg = 0.0;  // mean of the per-queue maxima over populated queues
  bool liveness_ok = true;
  std::vector<int> stranded_ids;  // cars still present at max_t
  double end_t = 0.0;
  std::vector<Event> events;
  std::vector<SwitchRecord> switches;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["end_t"] = end_t;
    j["liveness_ok"] = liveness_ok;
    j["mean_sojourn"] = mean_sojourn;
    j["worst_avg"] = worst_avg;
    j["queue1_max"] = queue_max[0];
    j["queue2_max"] = queue_max[1];
    j["stranded"] = stranded_ids;
    auto cars_j = nlohmann::ordered_json::array();
    for (const auto& c : cars) {
      cars_j.push_back({{"id", c.id},
                        {"queue", c.queue},
                        {"t_enter_zone", c.t_enter_zone},
                        {"t_depart", c.t_depart},
                        {"sojourn", c.sojourn}});
    }
    j["cars"] = cars_j;
    return j;
  }
};

}  // namespace crossing
