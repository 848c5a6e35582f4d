#pragma once

#include <algorithm>
#include <random>
#include <string>

#include "scenforge/dsl/spec.hpp"

namespace scenforge::testing {

// Random generator of specs that satisfy every DSL invariant, for
// round-trip and property tests.
class SpecGenerator {
 public:
  explicit SpecGenerator(std::uint64_t seed) : rng_(seed) {}

  dsl::ScenarioSpec next() {
    using namespace dsl;
    ScenarioSpec s;
    s.scenario_id = pick_string({"case-1", "123", "null", "id with spaces", "x:y", "#hash", "-dash", "n", "CIREN_0042"});
    s.environment.weather = pick_enum<Weather>();
    s.environment.time_of_day = pick_enum<TimeOfDay>();
    if (coin()) s.environment.time_hour = uniform_int(0, 23);

    auto& road = s.road_network;
    road.road_type = pick_enum<RoadType>();
    switch (road.road_type) {
      case RoadType::intersection: road.number_of_ways = 4; break;
      case RoadType::t_intersection: road.number_of_ways = 3; break;
      default: road.number_of_ways = uniform_int(1, 2); break;
    }
    road.number_of_lanes = uniform_int(1, kMaxLanes);
    road.road_markers = pick_enum<RoadMarker>();
    if (uniform_int(0, 4) == 0) {
      road.traffic_signs = {TrafficSign::not_mentioned};
    } else {
      for (auto sign : {TrafficSign::stop_sign, TrafficSign::speed_limit_sign, TrafficSign::traffic_light}) {
        if (coin()) road.traffic_signs.push_back(sign);
      }
      std::shuffle(road.traffic_signs.begin(), road.traffic_signs.end(), rng_);
    }
    if (road.has_sign(TrafficSign::speed_limit_sign)) road.speed_limit_value = speed();

    s.actors.ego.actor_id = "ego";
    fill_actor(s.actors.ego);
    const int npcs = uniform_int(0, kMaxNpcs);
    for (int i = 0; i < npcs; ++i) {
      ActorSpec npc;
      npc.actor_id = coin() ? "npc" + std::to_string(i + 1) : "vehicle_" + std::string(1, static_cast<char>('a' + i));
      fill_actor(npc);
      PositionSpec pos;
      pos.reference = (i == 0 || coin()) ? "ego" : s.actors.npcs[static_cast<std::size_t>(uniform_int(0, i - 1))].actor_id;
      pos.spatial_relation = pick_enum<SpatialRelation>();
      if (coin()) pos.heading_relation = pick_enum<HeadingRelation>();
      npc.position = pos;
      s.actors.npcs.push_back(npc);
    }

    const int entries = uniform_int(1, 3);
    const auto rules = supported_rule_ids();
    for (int i = 0; i < entries; ++i) {
      OracleEntry e;
      e.rule_id = rules[static_cast<std::size_t>(uniform_int(0, static_cast<int>(rules.size()) - 1))];
      e.violation_type = pick_string({"crossing_solid_line", "red_light", "unsafe_passing", "speeding", "failure to yield"});
      e.description = pick_string({"NPC crosses the centerline.", "He said \"stop\": didn't", "tab\there",
                                   "line1\nline2", "  padded  ", "# not a comment", "caf\xc3\xa9 \xe2\x86\x92 ok", "'single'"});
      if (coin()) {
        e.violating_actor = s.actors.npcs.empty() || coin()
                                ? std::string("ego")
                                : s.actors.npcs[static_cast<std::size_t>(uniform_int(0, npcs - 1))].actor_id;
      }
      s.oracle.push_back(e);
    }
    return s;
  }

  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return uniform_int(0, 1) == 1; }

 private:
  std::mt19937_64 rng_;

  double speed() {
    // Mix round numbers with arbitrary doubles to exercise shortest formatting.
    if (coin()) return static_cast<double>(uniform_int(1, 45));
    return std::uniform_real_distribution<double>(0.01, 45.0)(rng_);
  }

  template <typename E>
  E pick_enum() {
    const auto vocab = dsl::vocabulary<E>();
    return vocab[static_cast<std::size_t>(uniform_int(0, static_cast<int>(vocab.size()) - 1))].value;
  }

  std::string pick_string(std::initializer_list<const char*> options) {
    const auto idx = static_cast<std::size_t>(uniform_int(0, static_cast<int>(options.size()) - 1));
    return *(options.begin() + idx);
  }

  void fill_actor(dsl::ActorSpec& a) {
    a.actor_type = pick_enum<dsl::ActorType>();
    a.behavior = pick_enum<dsl::Behavior>();
    if (coin()) a.speed_mps = speed();
    if (coin()) a.model_id = coin() ? "vehicle.tesla.model3" : "vehicle.audi.tt";
  }
};

}  // namespace scenforge::testing
