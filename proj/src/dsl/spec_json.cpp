#include "scenforge/dsl/spec_json.hpp"

#include <stdexcept>

namespace scenforge::dsl {
namespace {

using nlohmann::json;

template <typename E>
E enum_at(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (auto e = from_token<E>(v.get<std::string>())) return *e;
  throw std::invalid_argument(std::string("bad ") + key + " token: " + v.get<std::string>());
}

json actor_json(const ActorSpec& a) {
  json j;
  j["actor_id"] = a.actor_id;
  j["actor_type"] = to_token(a.actor_type);
  j["behavior"] = to_token(a.behavior);
  if (a.speed_mps) j["speed_mps"] = *a.speed_mps;
  if (a.model_id) j["model_id"] = *a.model_id;
  if (a.position) {
    json p;
    p["reference"] = a.position->reference;
    p["spatial_relation"] = to_token(a.position->spatial_relation);
    if (a.position->heading_relation) p["heading_relation"] = to_token(*a.position->heading_relation);
    j["position"] = p;
  }
  return j;
}

ActorSpec actor_from(const json& j) {
  ActorSpec a;
  a.actor_id = j.at("actor_id").get<std::string>();
  a.actor_type = enum_at<ActorType>(j, "actor_type");
  a.behavior = enum_at<Behavior>(j, "behavior");
  if (j.contains("speed_mps")) a.speed_mps = j["speed_mps"].get<double>();
  if (j.contains("model_id")) a.model_id = j["model_id"].get<std::string>();
  if (j.contains("position")) {
    const auto& p = j["position"];
    PositionSpec pos;
    pos.reference = p.at("reference").get<std::string>();
    pos.spatial_relation = enum_at<SpatialRelation>(p, "spatial_relation");
    if (p.contains("heading_relation")) pos.heading_relation = enum_at<HeadingRelation>(p, "heading_relation");
    a.position = pos;
  }
  return a;
}

}  // namespace

json to_json(const OracleEntry& e) {
  json j;
  j["rule_id"] = e.rule_id;
  j["violation_type"] = e.violation_type;
  j["description"] = e.description;
  if (e.violating_actor) j["violating_actor"] = *e.violating_actor;
  return j;
}

OracleEntry oracle_entry_from_json(const json& j) {
  OracleEntry e;
  e.rule_id = j.at("rule_id").get<int>();
  e.violation_type = j.at("violation_type").get<std::string>();
  e.description = j.at("description").get<std::string>();
  if (j.contains("violating_actor")) e.violating_actor = j["violating_actor"].get<std::string>();
  return e;
}

json to_json(const ScenarioSpec& s) {
  json j;
  j["scenario_id"] = s.scenario_id;
  json env;
  env["weather"] = to_token(s.environment.weather);
  env["time_of_day"] = to_token(s.environment.time_of_day);
  if (s.environment.time_hour) env["time_hour"] = *s.environment.time_hour;
  j["environment"] = env;

  const auto& r = s.road_network;
  json road;
  road["road_type"] = to_token(r.road_type);
  road["number_of_ways"] = r.number_of_ways;
  road["number_of_lanes"] = r.number_of_lanes;
  road["road_markers"] = to_token(r.road_markers);
  road["traffic_signs"] = json::array();
  for (auto sign : r.traffic_signs) road["traffic_signs"].push_back(to_token(sign));
  if (r.speed_limit_value) road["speed_limit_value"] = *r.speed_limit_value;
  j["road_network"] = road;

  json actors;
  actors["ego"] = actor_json(s.actors.ego);
  actors["npcs"] = json::array();
  for (const auto& npc : s.actors.npcs) actors["npcs"].push_back(actor_json(npc));
  j["actors"] = actors;

  j["oracle"] = json::array();
  for (const auto& e : s.oracle) j["oracle"].push_back(to_json(e));
  return j;
}

ScenarioSpec spec_from_json(const json& j) {
  try {
    ScenarioSpec s;
    s.scenario_id = j.at("scenario_id").get<std::string>();
    const auto& env = j.at("environment");
    s.environment.weather = enum_at<Weather>(env, "weather");
    s.environment.time_of_day = enum_at<TimeOfDay>(env, "time_of_day");
    if (env.contains("time_hour")) s.environment.time_hour = env["time_hour"].get<int>();

    const auto& road = j.at("road_network");
    auto& r = s.road_network;
    r.road_type = enum_at<RoadType>(road, "road_type");
    r.number_of_ways = road.at("number_of_ways").get<int>();
    r.number_of_lanes = road.at("number_of_lanes").get<int>();
    r.road_markers = enum_at<RoadMarker>(road, "road_markers");
    for (const auto& t : road.at("traffic_signs")) {
      auto sign = from_token<TrafficSign>(t.get<std::string>());
      if (!sign) throw std::invalid_argument("bad traffic_signs token: " + t.get<std::string>());
      r.traffic_signs.push_back(*sign);
    }
    if (road.contains("speed_limit_value")) r.speed_limit_value = road["speed_limit_value"].get<double>();

    const auto& actors = j.at("actors");
    s.actors.ego = actor_from(actors.at("ego"));
    for (const auto& npc : actors.at("npcs")) s.actors.npcs.push_back(actor_from(npc));
    for (const auto& e : j.at("oracle")) s.oracle.push_back(oracle_entry_from_json(e));
    return s;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed scenario JSON: ") + e.what());
  }
}

}  // namespace scenforge::dsl
