#include "scenforge/synth/synth.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <sstream>

#include "scenforge/common/digest.hpp"
#include "scenforge/common/number_format.hpp"
#include "scenforge/dsl/spec_json.hpp"
#include "scenforge/synth/junction.hpp"

namespace scenforge::synth {
namespace {

using dsl::Behavior;
using dsl::HeadingRelation;
using dsl::RoadType;
using dsl::TimeOfDay;
using dsl::Weather;
using nlohmann::json;

constexpr std::string_view kDigestPrefix = "# content_digest: ";

template <typename E, std::size_t N>
E enum_from(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view name, const char* what) {
  for (const auto& [e, n] : table) {
    if (n == name) return e;
  }
  throw std::invalid_argument(std::string("unknown ") + what + " '" + std::string(name) + "'");
}

template <typename E, std::size_t N>
std::string_view enum_name(const std::array<std::pair<E, std::string_view>, N>& table, E e) {
  for (const auto& [v, n] : table) {
    if (v == e) return n;
  }
  return "?";
}

constexpr std::array<std::pair<Town, std::string_view>, 3> kTowns{{
    {Town::Town02, "Town02"}, {Town::Town04, "Town04"}, {Town::Town05, "Town05"}}};
constexpr std::array<std::pair<Configuration, std::string_view>, 6> kConfigs{{
    {Configuration::head_on, "head_on"},
    {Configuration::car_following, "car_following"},
    {Configuration::crossing_from_left, "crossing_from_left"},
    {Configuration::crossing_from_right, "crossing_from_right"},
    {Configuration::junction_conflict, "junction_conflict"},
    {Configuration::ego_only, "ego_only"},
}};
constexpr std::array<std::pair<Approach, std::string_view>, 3> kApproaches{{
    {Approach::left, "left"}, {Approach::right, "right"}, {Approach::opposite, "opposite"}}};
constexpr std::array<std::pair<Unit, std::string_view>, 4> kUnits{{
    {Unit::mps, "m/s"}, {Unit::m, "m"}, {Unit::s, "s"}, {Unit::degree, "degree"}}};
constexpr std::array<std::pair<Role, std::string_view>, 3> kRoles{{
    {Role::ego, "ego"}, {Role::adversary, "adversary"}, {Role::background, "background"}}};

bool is_junction(RoadType t) { return t == RoadType::intersection || t == RoadType::t_intersection; }

std::string heading_token(HeadingRelation h) { return std::string(dsl::to_token(h)); }

}  // namespace

std::string_view town_name(Town t) { return enum_name(kTowns, t); }
std::string_view configuration_name(Configuration c) { return enum_name(kConfigs, c); }
std::string_view approach_name(Approach a) { return enum_name(kApproaches, a); }
std::string_view unit_name(Unit u) { return enum_name(kUnits, u); }
std::string_view role_name(Role r) { return enum_name(kRoles, r); }

const ParamRange& ScenarioTemplate::free(std::string_view name) const {
  for (const auto& p : free_parameters) {
    if (p.name == name) return p;
  }
  throw std::out_of_range("no free parameter " + std::string(name));
}

const ActorParams& ScenarioTemplate::actor(std::string_view id) const {
  for (const auto& a : params.actors) {
    if (a.actor_id == id) return a;
  }
  throw std::out_of_range("no actor " + std::string(id));
}

int map_time(TimeOfDay time) { return time == TimeOfDay::nighttime ? 22 : 12; }

std::string map_weather(Weather weather, TimeOfDay time) {
  std::string stem;
  switch (weather) {
    case Weather::sunny:
    case Weather::not_mentioned: stem = "Clear"; break;
    case Weather::cloudy:
    case Weather::windy: stem = "Cloudy"; break;
    case Weather::overcast: stem = "WetCloudy"; break;
    case Weather::rainy: stem = "HardRain"; break;
    case Weather::snowy: stem = "SoftRain"; break;
    case Weather::foggy: stem = "Foggy"; break;
  }
  return stem + (time == TimeOfDay::nighttime ? "Night" : "Noon");
}

MapSelection select_map(RoadType road_type, int total_lanes) {
  MapSelection sel;
  switch (road_type) {
    case RoadType::intersection:
    case RoadType::t_intersection: sel.town = Town::Town05; break;
    case RoadType::curve:
      sel.town = Town::Town02;
      if (total_lanes != 2) {
        sel.warning = "curve with " + std::to_string(total_lanes) + " lanes realized as the 2-lane Town02 curve";
      }
      break;
    case RoadType::straight:
      if (total_lanes == 2) {
        sel.town = Town::Town02;
      } else if (total_lanes == 4) {
        sel.town = Town::Town04;
      } else {
        // Nearest supported lane count; ties go to the smaller road.
        sel.town = std::abs(total_lanes - 2) <= std::abs(total_lanes - 4) ? Town::Town02 : Town::Town04;
        sel.warning = "straight road with " + std::to_string(total_lanes) + " lanes snapped to " +
                      std::string(town_name(sel.town)) + " (" + (sel.town == Town::Town02 ? "2" : "4") + " lanes)";
      }
      break;
  }
  return sel;
}

ParamRange widen_to_range(double base, RangeKind kind, std::string name) {
  if (kind == RangeKind::init_dist) return {std::move(name), kInitDistLow, kInitDistHigh, Unit::m};
  return {std::move(name), 0.8 * base, 1.2 * base, Unit::mps};
}

ScenarioTemplate build_template(const normalizer::NormalizedSpec& normalized) {
  const dsl::ScenarioSpec& s = normalized.spec;
  ScenarioTemplate t;
  TemplateParams& p = t.params;
  p.scenario_id = s.scenario_id;
  p.topology = s.road_network.road_type;
  p.time_hour = s.environment.time_hour.value_or(map_time(s.environment.time_of_day));
  p.weather_preset = map_weather(s.environment.weather, s.environment.time_of_day);
  p.marker = s.road_network.road_markers;
  p.signs = s.road_network.traffic_signs;
  p.speed_limit = s.road_network.speed_limit_value.value_or(kDefaultSpeedLimitMps);
  p.oracle = s.oracle;

  const int ways = s.road_network.number_of_ways;
  const int lanes = s.road_network.number_of_lanes;
  const auto sel = select_map(p.topology, is_junction(p.topology) ? lanes : lanes * ways);
  p.town = sel.town;
  if (sel.warning) t.warnings.push_back(*sel.warning);
  if (!is_junction(p.topology) && ways == 1) {
    t.warnings.push_back("one-way road realized as a two-way " + std::string(town_name(p.town)) + " road");
  }
  p.lanes = is_junction(p.topology) ? lanes : (p.town == Town::Town04 ? 2 : 1);

  // The adversary is the actor the first oracle entry attributes its
  // violation to, when that is an NPC; otherwise the first NPC.
  const auto& npcs = s.actors.npcs;
  const dsl::ActorSpec* adversary = nullptr;
  if (!s.oracle.empty()) {
    const auto id = dsl::effective_violating_actor(s, s.oracle.front());
    for (const auto& n : npcs) {
      if (n.actor_id == id) adversary = &n;
    }
  }
  if (!adversary && !npcs.empty()) adversary = &npcs.front();

  const auto speed_of = [](const dsl::ActorSpec& a) { return a.speed_mps.value_or(normalizer::kDefaultSpeedMps); };
  const auto heading_of = [](const dsl::ActorSpec& a) {
    return a.position && a.position->heading_relation ? *a.position->heading_relation
                                                      : HeadingRelation::opposite_direction;
  };

  if (!adversary) {
    p.configuration = Configuration::ego_only;
  } else {
    p.adversary_id = adversary->actor_id;
    const HeadingRelation h = heading_of(*adversary);
    const std::string topo(dsl::to_token(p.topology));
    if (!is_junction(p.topology)) {
      if (h == HeadingRelation::opposite_direction) {
        p.configuration = Configuration::head_on;
      } else if (h == HeadingRelation::same_direction) {
        p.configuration = Configuration::car_following;
      } else {
        throw CompatibilityError("heading_relation " + heading_token(h) + " is incompatible with road_type " + topo);
      }
    } else {
      p.configuration = Configuration::junction_conflict;
      switch (h) {
        case HeadingRelation::from_left: p.approach = Approach::left; break;
        case HeadingRelation::from_right: p.approach = Approach::right; break;
        case HeadingRelation::opposite_direction: p.approach = Approach::opposite; break;
        case HeadingRelation::same_direction:
          throw CompatibilityError("heading_relation same_direction is incompatible with road_type " + topo +
                                   " for the conflicting actor");
      }
    }
  }

  p.ego_speed = widen_to_range(speed_of(s.actors.ego), RangeKind::speed, std::string(kEgoSpeed));
  p.npc_speed = widen_to_range(adversary ? speed_of(*adversary) : normalizer::kDefaultSpeedMps, RangeKind::speed,
                               std::string(kNpcSpeed));
  p.ego_init_dist = widen_to_range(0.0, RangeKind::init_dist, std::string(kEgoInitDist));
  p.npc_init_dist = widen_to_range(0.0, RangeKind::init_dist, std::string(kNpcInitDist));
  p.ego_model = s.actors.ego.model_id.value_or(std::string(normalizer::kDefaultEgoModel));

  ActorParams ego;
  ego.actor_id = std::string(dsl::kEgoId);
  ego.role = Role::ego;
  ego.actor_type = s.actors.ego.actor_type;
  ego.behavior = s.actors.ego.behavior;
  ego.model_id = p.ego_model;
  ego.base_speed = speed_of(s.actors.ego);
  p.actors.push_back(ego);
  for (const auto& n : npcs) {
    ActorParams a;
    a.actor_id = n.actor_id;
    a.role = adversary && n.actor_id == adversary->actor_id ? Role::adversary : Role::background;
    a.actor_type = n.actor_type;
    a.behavior = n.behavior;
    a.model_id = n.model_id.value_or("");
    a.base_speed = speed_of(n);
    a.position = n.position;
    if (a.position && !a.position->heading_relation) a.position->heading_relation = heading_of(n);
    p.npc_models.push_back(a.model_id);
    p.actors.push_back(a);
  }

  // Behavior/topology compatibility.
  for (const auto& a : p.actors) {
    const bool turning = a.behavior == Behavior::turn_left || a.behavior == Behavior::turn_right;
    if (!is_junction(p.topology)) {
      if (turning) {
        t.warnings.push_back(a.actor_id + " behavior " + std::string(dsl::to_token(a.behavior)) + " on a " +
                             std::string(dsl::to_token(p.topology)) + " road is driven as go_forward");
      }
      if (a.role == Role::background && a.position) {
        const auto h = *a.position->heading_relation;
        if (h == HeadingRelation::from_left || h == HeadingRelation::from_right) {
          throw CompatibilityError("heading_relation " + heading_token(h) + " of " + a.actor_id +
                                   " is incompatible with road_type " + std::string(dsl::to_token(p.topology)));
        }
      }
      continue;
    }
    const auto layout = junction_layout(p);
    const Leg entry = actor_entry_leg(p, a);
    if (!layout.has(entry)) {
      throw CompatibilityError(a.actor_id + " approaches from a leg that the " +
                               std::string(dsl::to_token(p.topology)) + " does not have");
    }
    if (a.behavior == Behavior::static_ || a.behavior == Behavior::stop) continue;
    const Leg exit = exit_leg(entry, a.behavior);
    if (!layout.has(exit)) {
      throw CompatibilityError("behavior " + std::string(dsl::to_token(a.behavior)) + " of " + a.actor_id +
                               " has no exit leg at this " + std::string(dsl::to_token(p.topology)) + " (heading " +
                               (a.position ? heading_token(*a.position->heading_relation) : std::string("ego")) + ")");
    }
  }

  t.free_parameters = {p.ego_init_dist, p.npc_init_dist, p.ego_speed, p.npc_speed};
  std::sort(t.free_parameters.begin(), t.free_parameters.end(),
            [](const ParamRange& a, const ParamRange& b) { return a.name < b.name; });
  t.fixed_parameters["time_hour"] = p.time_hour;
  t.fixed_parameters["speed_limit"] = p.speed_limit;
  t.fixed_parameters["lanes"] = p.lanes;
  for (const auto& a : p.actors) {
    if (a.role == Role::background) t.fixed_parameters["speed." + a.actor_id] = a.base_speed;
  }
  return t;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json range_json(const ParamRange& r) {
  return json{{"name", r.name}, {"low", r.low}, {"high", r.high}, {"unit", unit_name(r.unit)}};
}

ParamRange range_from(const json& j) {
  return {j.at("name").get<std::string>(), j.at("low").get<double>(), j.at("high").get<double>(),
          enum_from(kUnits, j.at("unit").get<std::string>(), "unit")};
}

json actor_json(const ActorParams& a) {
  json j{{"actor_id", a.actor_id},
         {"role", role_name(a.role)},
         {"actor_type", dsl::to_token(a.actor_type)},
         {"behavior", dsl::to_token(a.behavior)},
         {"model_id", a.model_id},
         {"base_speed", a.base_speed}};
  if (a.position) {
    j["position"] = json{{"reference", a.position->reference},
                         {"spatial_relation", dsl::to_token(a.position->spatial_relation)},
                         {"heading_relation", dsl::to_token(*a.position->heading_relation)}};
  }
  return j;
}

template <typename E>
E token_at(const json& j, const char* key) {
  if (auto v = dsl::from_token<E>(j.at(key).get<std::string>())) return *v;
  throw std::invalid_argument(std::string("bad token for ") + key);
}

ActorParams actor_from(const json& j) {
  ActorParams a;
  a.actor_id = j.at("actor_id").get<std::string>();
  a.role = enum_from(kRoles, j.at("role").get<std::string>(), "role");
  a.actor_type = token_at<dsl::ActorType>(j, "actor_type");
  a.behavior = token_at<Behavior>(j, "behavior");
  a.model_id = j.at("model_id").get<std::string>();
  a.base_speed = j.at("base_speed").get<double>();
  if (j.contains("position")) {
    const auto& pj = j["position"];
    a.position = dsl::PositionSpec{pj.at("reference").get<std::string>(),
                                   token_at<dsl::SpatialRelation>(pj, "spatial_relation"),
                                   token_at<HeadingRelation>(pj, "heading_relation")};
  }
  return a;
}

}  // namespace

json to_json(const ScenarioTemplate& t) {
  const auto& p = t.params;
  json params{{"scenario_id", p.scenario_id},
              {"town", town_name(p.town)},
              {"time_hour", p.time_hour},
              {"weather_preset", p.weather_preset},
              {"topology", dsl::to_token(p.topology)},
              {"configuration", configuration_name(p.configuration)},
              {"lanes", p.lanes},
              {"EGO_INIT_DIST", range_json(p.ego_init_dist)},
              {"NPC_INIT_DIST", range_json(p.npc_init_dist)},
              {"ego_speed", range_json(p.ego_speed)},
              {"npc_speed", range_json(p.npc_speed)},
              {"ego_model", p.ego_model},
              {"npc_models", p.npc_models},
              {"marker", dsl::to_token(p.marker)},
              {"speed_limit", p.speed_limit},
              {"adversary_id", p.adversary_id}};
  params["approach"] = p.approach ? json(approach_name(*p.approach)) : json(nullptr);
  params["signs"] = json::array();
  for (auto s : p.signs) params["signs"].push_back(dsl::to_token(s));
  params["oracle"] = json::array();
  for (const auto& e : p.oracle) params["oracle"].push_back(dsl::to_json(e));
  params["actors"] = json::array();
  for (const auto& a : p.actors) params["actors"].push_back(actor_json(a));

  json j;
  j["params"] = params;
  j["free_parameters"] = json::array();
  for (const auto& r : t.free_parameters) j["free_parameters"].push_back(range_json(r));
  j["fixed_parameters"] = t.fixed_parameters;
  j["warnings"] = t.warnings;
  return j;
}

ScenarioTemplate template_from_json(const json& j) {
  try {
    ScenarioTemplate t;
    const auto& pj = j.at("params");
    auto& p = t.params;
    p.scenario_id = pj.at("scenario_id").get<std::string>();
    p.town = enum_from(kTowns, pj.at("town").get<std::string>(), "town");
    p.time_hour = pj.at("time_hour").get<int>();
    p.weather_preset = pj.at("weather_preset").get<std::string>();
    p.topology = token_at<RoadType>(pj, "topology");
    p.configuration = enum_from(kConfigs, pj.at("configuration").get<std::string>(), "configuration");
    if (!pj.at("approach").is_null()) p.approach = enum_from(kApproaches, pj["approach"].get<std::string>(), "approach");
    p.lanes = pj.at("lanes").get<int>();
    p.ego_init_dist = range_from(pj.at("EGO_INIT_DIST"));
    p.npc_init_dist = range_from(pj.at("NPC_INIT_DIST"));
    p.ego_speed = range_from(pj.at("ego_speed"));
    p.npc_speed = range_from(pj.at("npc_speed"));
    p.ego_model = pj.at("ego_model").get<std::string>();
    p.npc_models = pj.at("npc_models").get<std::vector<std::string>>();
    p.marker = token_at<dsl::RoadMarker>(pj, "marker");
    for (const auto& s : pj.at("signs")) {
      auto sign = dsl::from_token<dsl::TrafficSign>(s.get<std::string>());
      if (!sign) throw std::invalid_argument("bad sign token");
      p.signs.push_back(*sign);
    }
    p.speed_limit = pj.at("speed_limit").get<double>();
    for (const auto& e : pj.at("oracle")) p.oracle.push_back(dsl::oracle_entry_from_json(e));
    for (const auto& a : pj.at("actors")) p.actors.push_back(actor_from(a));
    p.adversary_id = pj.at("adversary_id").get<std::string>();
    for (const auto& r : j.at("free_parameters")) t.free_parameters.push_back(range_from(r));
    t.fixed_parameters = j.at("fixed_parameters").get<std::map<std::string, double>>();
    t.warnings = j.at("warnings").get<std::vector<std::string>>();
    return t;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed template JSON: ") + e.what());
  }
}

std::string template_text(const ScenarioTemplate& t) { return to_json(t).dump(2) + "\n"; }

std::uint64_t template_digest(const ScenarioTemplate& t) { return fnv1a64(to_json(t).dump()); }

// ---------------------------------------------------------------------------
// Scenic rendering

namespace {

std::string num(double v) { return format_sig6(v); }

std::string ident(const std::string& actor_id) {
  std::string out;
  for (char c : actor_id) out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out.front()))) out.insert(out.begin(), 'a');
  return out;
}

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string py_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  return out + "\"";
}

std::string vehicle_class(dsl::ActorType t) { return t == dsl::ActorType::truck ? "Truck" : "Car"; }

std::string maneuver_type(Behavior b) {
  switch (b) {
    case Behavior::turn_left: return "ManeuverType.LEFT_TURN";
    case Behavior::turn_right: return "ManeuverType.RIGHT_TURN";
    default: return "ManeuverType.STRAIGHT";
  }
}

void render_behaviors(std::ostringstream& o, const ScenarioTemplate& t) {
  const auto& p = t.params;
  o << "behavior EgoBehavior(speed):\n"
       "    do FollowLaneBehavior(target_speed=speed)\n\n";
  o << "behavior CruiseBehavior(speed):\n"
       "    do FollowLaneBehavior(target_speed=speed)\n\n";
  o << "behavior StopBehavior(speed):\n"
       "    do FollowLaneBehavior(target_speed=speed) until (distance from self to ego) < 30\n"
       "    take SetBrakeAction(1.0)\n\n";
  switch (p.configuration) {
    case Configuration::head_on:
      o << "behavior HeadOnBehavior(speed, trigger_dist):\n"
           "    try:\n"
           "        do FollowLaneBehavior(target_speed=speed)\n"
           "    interrupt when (distance from self to ego) <= trigger_dist:\n"
           "        do LaneChangeBehavior(laneSectionToSwitch=self.laneSection._laneToLeft, target_speed=speed)\n"
           "        do FollowLaneBehavior(target_speed=speed)\n\n";
      break;
    case Configuration::car_following:
      o << "behavior LeadBehavior(speed):\n"
           "    do FollowLaneBehavior(target_speed=speed)\n\n";
      break;
    case Configuration::junction_conflict:
    case Configuration::crossing_from_left:
    case Configuration::crossing_from_right:
      o << "behavior ConflictBehavior(speed, trajectory):\n"
           "    do FollowTrajectoryBehavior(target_speed=speed, trajectory=trajectory)\n"
           "    do FollowLaneBehavior(target_speed=speed)\n\n";
      break;
    case Configuration::ego_only: break;
  }
}

void render_placement(std::ostringstream& o, const ScenarioTemplate& t) {
  const auto& p = t.params;
  const bool junction = p.configuration == Configuration::junction_conflict;
  if (junction) {
    const int legs = p.topology == RoadType::t_intersection ? 3 : 4;
    o << "intersection = Uniform(*filter(lambda i: len(i.roads) == " << legs << ", network.intersections))\n";
    o << "ego_maneuver = Uniform(*filter(lambda m: m.type is " << maneuver_type(p.actors.front().behavior)
      << ", intersection.maneuvers))\n";
    o << "ego_trajectory = [ego_maneuver.startLane, ego_maneuver.connectingLane, ego_maneuver.endLane]\n";
    o << "ego_entry = new OrientedPoint at ego_maneuver.connectingLane.centerline[0]\n";
  } else if (p.topology == RoadType::curve) {
    o << "ego_lane = Uniform(*filter(lambda l: abs(l.centerline.orientation.value(l.centerline.length) - "
         "l.centerline.orientation.value(0)) >= 30 deg, network.lanes))\n";
    o << "conflict_point = new OrientedPoint on ego_lane.centerline\n";
  } else {
    o << "ego_lane = Uniform(*filter(lambda l: l.road.length >= 150, network.lanes))\n";
    o << "conflict_point = new OrientedPoint on ego_lane.centerline\n";
  }
  o << "\n";

  const auto& ego = p.actors.front();
  o << "ego = new " << vehicle_class(ego.actor_type) << " following roadDirection from "
    << (junction ? "ego_entry" : "conflict_point") << " for -globalParameters.EGO_INIT_DIST,\n"
    << "    with blueprint EGO_MODEL,\n";
  if (ego.behavior == Behavior::static_) {
    o << "    with behavior CruiseBehavior(0)\n";
  } else if (ego.behavior == Behavior::stop) {
    o << "    with behavior StopBehavior(globalParameters.ego_speed)\n";
  } else if (junction) {
    o << "    with behavior ConflictBehavior(globalParameters.ego_speed, ego_trajectory)\n";
  } else {
    o << "    with behavior EgoBehavior(globalParameters.ego_speed)\n";
  }

  for (std::size_t i = 1; i < p.actors.size(); ++i) {
    const auto& a = p.actors[i];
    const std::string name = ident(a.actor_id);
    const std::string model = upper(name) + "_MODEL";
    o << "\n";
    const bool adv = a.role == Role::adversary;
    const std::string speed = adv ? "globalParameters.npc_speed" : num(a.base_speed);
    const std::string rel = std::string(dsl::to_token(*a.position->heading_relation));
    if (junction) {
      o << name << "_maneuver = Uniform(*filter(lambda m: m.type is " << maneuver_type(a.behavior)
        << ", ego_maneuver.conflictingManeuvers))\n";
      o << name << "_trajectory = [" << name << "_maneuver.startLane, " << name << "_maneuver.connectingLane, "
        << name << "_maneuver.endLane]\n";
      o << name << "_entry = new OrientedPoint at " << name << "_maneuver.connectingLane.centerline[0]\n";
      o << name << " = new " << vehicle_class(a.actor_type) << " following roadDirection from " << name
        << "_entry for -globalParameters.EGO_INIT_DIST * " << speed << " / globalParameters.ego_speed,\n";
    } else if (rel == "opposite_direction") {
      o << name << "_spot = new OrientedPoint left of conflict_point by 3.5, facing 180 deg relative to conflict_point\n";
      o << name << " = new " << vehicle_class(a.actor_type) << " following roadDirection from " << name
        << "_spot for -" << (adv ? "globalParameters.NPC_INIT_DIST" : num(kInitDistHigh)) << ",\n";
    } else {
      o << name << " = new " << vehicle_class(a.actor_type) << " following roadDirection from conflict_point for "
        << (adv ? "globalParameters.NPC_INIT_DIST" : num(kInitDistHigh)) << ",\n";
    }
    o << "    with blueprint " << model << ",\n";
    if (a.behavior == Behavior::static_) {
      o << "    with behavior CruiseBehavior(0)\n";
    } else if (a.behavior == Behavior::stop) {
      o << "    with behavior StopBehavior(" << speed << ")\n";
    } else if (adv && p.configuration == Configuration::head_on) {
      o << "    with behavior HeadOnBehavior(" << speed << ", globalParameters.NPC_INIT_DIST)\n";
    } else if (adv && p.configuration == Configuration::car_following) {
      o << "    with behavior LeadBehavior(" << speed << ")\n";
    } else if (junction) {
      o << "    with behavior ConflictBehavior(" << speed << ", " << name << "_trajectory)\n";
    } else {
      o << "    with behavior CruiseBehavior(" << speed << ")\n";
    }
  }
}

}  // namespace

ScenicProgram render_scenic(const ScenarioTemplate& t) {
  const auto& p = t.params;
  std::ostringstream body;
  body << "param map = localPath(f\"maps/{globalParameters.carla_map}.xodr\")\n";
  body << "param carla_map = '" << town_name(p.town) << "'\n";
  body << "model scenic.simulators.carla.model\n\n";
  body << "param time_hour = " << p.time_hour << "\n";
  body << "param weather = '" << p.weather_preset << "'\n";
  body << "param speed_limit = " << num(p.speed_limit) << "\n";
  for (const auto& r : t.free_parameters) {
    body << "param " << r.name << " = VerifaiRange(" << num(r.low) << ", " << num(r.high) << ")\n";
  }
  body << "\n";
  body << "# topology: " << dsl::to_token(p.topology) << ", configuration: " << configuration_name(p.configuration);
  if (p.approach) body << ", adversary approach: " << approach_name(*p.approach);
  body << "\n# road markers: " << dsl::to_token(p.marker) << ", signs:";
  if (p.signs.empty()) body << " none";
  for (auto s : p.signs) body << " " << dsl::to_token(s);
  body << "\n";
  for (const auto& e : p.oracle) {
    body << "# oracle: CVC_" << e.rule_id << " " << e.violation_type;
    if (e.violating_actor) body << " by " << *e.violating_actor;
    body << "\n";
  }
  body << "\n";
  body << "EGO_MODEL = " << py_string(p.ego_model) << "\n";
  for (std::size_t i = 1; i < p.actors.size(); ++i) {
    body << upper(ident(p.actors[i].actor_id)) << "_MODEL = " << py_string(p.actors[i].model_id) << "\n";
  }
  body << "\n";
  render_behaviors(body, t);
  render_placement(body, t);
  body << "\nterminate after 60 seconds\n";

  const std::string header_id = "# scenario_id: " + p.scenario_id + "\n";
  const std::string text_wo_digest = header_id + body.str();
  const std::uint64_t digest = fnv1a64(text_wo_digest);
  ScenicProgram prog;
  prog.source_text = header_id + std::string(kDigestPrefix) + digest_hex(digest) + "\n" + body.str();
  prog.content_digest = digest;
  return prog;
}

std::uint64_t scenic_digest(std::string_view text) {
  std::string stripped;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size() - 1;
    const std::string_view line = text.substr(start, end - start + 1);
    if (line.substr(0, kDigestPrefix.size()) != kDigestPrefix) stripped += line;
    start = end + 1;
  }
  return fnv1a64(stripped);
}

std::map<std::string, std::pair<double, double>> parse_verifai_ranges(std::string_view text) {
  static const std::regex re(R"(param\s+(\w+)\s*=\s*VerifaiRange\(\s*([^,\s]+)\s*,\s*([^)\s]+)\s*\))");
  std::map<std::string, std::pair<double, double>> out;
  const std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    if (!out.emplace(m[1].str(), std::make_pair(std::stod(m[2].str()), std::stod(m[3].str()))).second) {
      throw std::invalid_argument("VerifaiRange for " + m[1].str() + " appears more than once");
    }
  }
  // Any VerifaiRange not bound by a param line is a template/text mismatch.
  std::size_t count = 0;
  for (std::size_t pos = s.find("VerifaiRange("); pos != std::string::npos; pos = s.find("VerifaiRange(", pos + 1)) ++count;
  if (count != out.size()) throw std::invalid_argument("unbound VerifaiRange expression in Scenic text");
  return out;
}

}  // namespace scenforge::synth
