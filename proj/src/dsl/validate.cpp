#include <algorithm>
#include <map>
#include <set>

#include "scenforge/common/number_format.hpp"
#include "scenforge/dsl/document.hpp"
#include "validate_internal.hpp"

namespace scenforge::dsl {
namespace detail {

bool PathMask::blocked(const std::string& path) const {
  for (const auto& p : paths_) {
    if (path == p) return true;
    if (path.size() > p.size() && path.compare(0, p.size(), p) == 0 && (p == "/" || path[p.size()] == '/')) {
      return true;
    }
  }
  return false;
}

namespace {

class Checker {
 public:
  Checker(const ScenarioSpec& spec, const PathMask& mask) : spec_(spec), mask_(mask) {}

  std::vector<ValidationIssue> run() {
    check_id();
    check_environment();
    check_road();
    check_actors();
    check_oracle();
    sort_issues(issues_);
    return std::move(issues_);
  }

 private:
  const ScenarioSpec& spec_;
  const PathMask& mask_;
  std::vector<ValidationIssue> issues_;

  bool ok(std::initializer_list<std::string> deps) const {
    return std::none_of(deps.begin(), deps.end(), [&](const std::string& d) { return mask_.blocked(d); });
  }

  void add(std::string path, IssueKind kind, std::string message, std::vector<std::string> allowed = {}) {
    issues_.push_back({std::move(path), kind, std::move(message), std::move(allowed)});
  }

  void check_speed(const std::string& path, const std::optional<double>& v) {
    if (!v || !ok({path})) return;
    if (!(*v > 0.0 && *v <= kMaxSpeedMps)) {
      add(path, IssueKind::range_violation,
          "speed " + format_shortest(*v) + " m/s outside (0, " + format_shortest(kMaxSpeedMps) + "]");
    }
  }

  void check_id() {
    if (ok({"/scenario_id"}) && spec_.scenario_id.empty()) {
      add("/scenario_id", IssueKind::missing_section, "scenario_id is empty");
    }
  }

  void check_environment() {
    const auto& env = spec_.environment;
    const std::string p = "/environment/time_hour";
    if (env.time_hour && ok({p}) && (*env.time_hour < 0 || *env.time_hour > 23)) {
      add(p, IssueKind::range_violation, "time_hour " + std::to_string(*env.time_hour) + " outside [0, 23]");
    }
  }

  void check_road() {
    const auto& road = spec_.road_network;
    const std::string ways = "/road_network/number_of_ways";
    const std::string lanes = "/road_network/number_of_lanes";
    const std::string type = "/road_network/road_type";
    const std::string signs = "/road_network/traffic_signs";
    const std::string limit = "/road_network/speed_limit_value";

    if (ok({ways})) {
      if (road.number_of_ways < 1) {
        add(ways, IssueKind::range_violation, "number_of_ways must be a positive integer");
      } else if (ok({type})) {
        bool consistent = true;
        std::string expected;
        switch (road.road_type) {
          case RoadType::intersection:
            consistent = road.number_of_ways == 4;
            expected = "4";
            break;
          case RoadType::t_intersection:
            consistent = road.number_of_ways == 3;
            expected = "3";
            break;
          case RoadType::straight:
          case RoadType::curve:
            consistent = road.number_of_ways == 1 || road.number_of_ways == 2;
            expected = "1 or 2";
            break;
        }
        if (!consistent) {
          add(ways, IssueKind::inconsistent,
              std::string(to_token(road.road_type)) + " requires number_of_ways " + expected + ", got " +
                  std::to_string(road.number_of_ways));
        }
      }
    }
    if (ok({lanes}) && (road.number_of_lanes < 1 || road.number_of_lanes > kMaxLanes)) {
      add(lanes, IssueKind::range_violation,
          "number_of_lanes " + std::to_string(road.number_of_lanes) + " outside [1, " + std::to_string(kMaxLanes) +
              "]");
    }

    if (ok({signs})) {
      std::set<TrafficSign> seen;
      for (std::size_t i = 0; i < road.traffic_signs.size(); ++i) {
        const auto s = road.traffic_signs[i];
        const std::string item = signs + "/" + std::to_string(i);
        if (!seen.insert(s).second) {
          add(item, IssueKind::inconsistent, "duplicate sign " + std::string(to_token(s)));
        } else if (s == TrafficSign::not_mentioned && road.traffic_signs.size() > 1) {
          add(item, IssueKind::inconsistent, "not_mentioned cannot be combined with other signs");
        }
      }
      if (ok({limit})) {
        const bool has_sign = road.has_sign(TrafficSign::speed_limit_sign);
        if (has_sign && !road.speed_limit_value) {
          add(limit, IssueKind::inconsistent, "speed_limit_sign listed without speed_limit_value");
        } else if (!has_sign && road.speed_limit_value) {
          add(limit, IssueKind::inconsistent, "speed_limit_value given without speed_limit_sign");
        } else if (road.speed_limit_value) {
          check_speed(limit, road.speed_limit_value);
        }
      }
    } else {
      check_speed(limit, road.speed_limit_value);
    }
  }

  void check_actors() {
    const auto& actors = spec_.actors;
    if (ok({"/actors/ego"})) {
      const auto& ego = actors.ego;
      if (ok({"/actors/ego/actor_id"}) && ego.actor_id != kEgoId) {
        add("/actors/ego/actor_id", IssueKind::inconsistent, "ego actor_id must be \"ego\"");
      }
      check_speed("/actors/ego/speed_mps", ego.speed_mps);
      if (ego.position && ok({"/actors/ego/position"})) {
        add("/actors/ego/position", IssueKind::inconsistent, "ego has no position; NPCs are placed relative to it");
      }
      if (ego.model_id && ego.model_id->empty() && ok({"/actors/ego/model_id"})) {
        add("/actors/ego/model_id", IssueKind::missing_section, "model_id is empty");
      }
    }
    if (!ok({"/actors/npcs"})) return;
    if (static_cast<int>(actors.npcs.size()) > kMaxNpcs) {
      add("/actors/npcs", IssueKind::range_violation,
          std::to_string(actors.npcs.size()) + " NPCs exceed the maximum of " + std::to_string(kMaxNpcs));
    }

    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < actors.npcs.size(); ++i) {
      const auto& npc = actors.npcs[i];
      const std::string base = "/actors/npcs/" + std::to_string(i);
      if (ok({base + "/actor_id"})) {
        if (npc.actor_id.empty()) {
          add(base + "/actor_id", IssueKind::missing_section, "actor_id is empty");
        } else if (npc.actor_id == kEgoId) {
          add(base + "/actor_id", IssueKind::inconsistent, "NPC cannot use the reserved id \"ego\"");
        } else if (!index.emplace(npc.actor_id, i).second) {
          add(base + "/actor_id", IssueKind::inconsistent, "duplicate actor_id " + npc.actor_id);
        }
      }
      check_speed(base + "/speed_mps", npc.speed_mps);
      if (npc.model_id && npc.model_id->empty() && ok({base + "/model_id"})) {
        add(base + "/model_id", IssueKind::missing_section, "model_id is empty");
      }
      if (!npc.position && ok({base + "/position"})) {
        add(base + "/position", IssueKind::missing_section, "NPC requires a position");
      }
    }

    // Reference resolution and cycle detection over the NPC reference graph.
    for (std::size_t i = 0; i < actors.npcs.size(); ++i) {
      const auto& npc = actors.npcs[i];
      const std::string path = "/actors/npcs/" + std::to_string(i) + "/position/reference";
      if (!npc.position || !ok({path})) continue;
      const std::string& ref = npc.position->reference;
      if (ref == kEgoId) continue;
      if (!index.count(ref)) {
        add(path, IssueKind::inconsistent, "reference \"" + ref + "\" names no actor");
        continue;
      }
      std::set<std::string> visited{npc.actor_id};
      std::string cur = ref;
      bool cycle = false;
      while (cur != kEgoId) {
        if (!visited.insert(cur).second) {
          cycle = true;
          break;
        }
        const auto it = index.find(cur);
        if (it == index.end()) break;
        const auto& pos = actors.npcs[it->second].position;
        if (!pos) break;
        cur = pos->reference;
      }
      if (cycle) add(path, IssueKind::inconsistent, "reference cycle through \"" + ref + "\"");
    }
  }

  void check_oracle() {
    if (!ok({"/oracle"})) return;
    if (spec_.oracle.empty()) {
      add("/oracle", IssueKind::missing_section, "oracle needs at least one entry");
      return;
    }
    for (std::size_t i = 0; i < spec_.oracle.size(); ++i) {
      const auto& e = spec_.oracle[i];
      const std::string base = "/oracle/" + std::to_string(i);
      if (ok({base + "/rule_id"}) && !is_supported_rule(e.rule_id)) {
        std::vector<std::string> allowed;
        for (int r : supported_rule_ids()) allowed.push_back(cvc_key(r));
        add(base + "/rule_id", IssueKind::invalid_enum, "unsupported rule " + cvc_key(e.rule_id), allowed);
      }
      if (ok({base + "/violation_type"}) && e.violation_type.empty()) {
        add(base + "/violation_type", IssueKind::missing_section, "violation_type is empty");
      }
      if (ok({base + "/description"}) && e.description.empty()) {
        add(base + "/description", IssueKind::missing_section, "description is empty");
      }
      if (e.violating_actor && ok({base + "/violating_actor"}) && !mask_.blocked("/actors/npcs") &&
          !spec_.actors.find(*e.violating_actor)) {
        add(base + "/violating_actor", IssueKind::inconsistent,
            "violating_actor \"" + *e.violating_actor + "\" names no actor");
      }
    }
  }
};

}  // namespace

std::vector<ValidationIssue> validate_masked(const ScenarioSpec& spec, const PathMask& mask) {
  return Checker(spec, mask).run();
}

}  // namespace detail

std::vector<ValidationIssue> validate_spec(const ScenarioSpec& spec) {
  return detail::validate_masked(spec, detail::PathMask{});
}

std::string cvc_key(int rule_id) { return "CVC_" + std::to_string(rule_id); }

}  // namespace scenforge::dsl
