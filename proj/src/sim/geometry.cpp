#include "scenforge/sim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "scenforge/common/digest.hpp"

namespace scenforge::sim {

using synth::Leg;

std::string_view signal_state_name(SignalState s) {
  switch (s) {
    case SignalState::green: return "green";
    case SignalState::yellow: return "yellow";
    case SignalState::red: return "red";
  }
  return "?";
}

std::string_view control_name(Control c) {
  switch (c) {
    case Control::none: return "none";
    case Control::signal: return "signal";
    case Control::stop: return "stop";
    case Control::yield: return "yield";
  }
  return "?";
}

SignalState SignalSchedule::state(double t) const {
  double phase = std::fmod(t - offset_s, cycle_s);
  if (phase < 0.0) phase += cycle_s;
  if (phase < green_s) return SignalState::green;
  if (phase < green_s + yellow_s) return SignalState::yellow;
  return SignalState::red;
}

Vec2 leg_direction(Leg leg) { return rotate_quarter(Vec2{0.0, -1.0}, static_cast<int>(leg)); }

std::string_view leg_name(Leg leg) {
  switch (leg) {
    case Leg::south: return "south";
    case Leg::east: return "east";
    case Leg::north: return "north";
    case Leg::west: return "west";
  }
  return "?";
}

VehicleInfo footprint_for(const std::string& id, dsl::ActorType type) {
  if (type == dsl::ActorType::truck) return {id, type, 8.0, 2.5};
  return {id, type, 4.5, 2.0};
}

bool RoadGeometry::in_region(Vec2 p) const {
  return is_junction() && std::abs(p.x) <= region_half && std::abs(p.y) <= region_half;
}

const Approach* RoadGeometry::approach(Leg leg) const {
  for (const auto& a : approaches) {
    if (a.leg == leg) return &a;
  }
  return nullptr;
}

const VehicleInfo& RoadGeometry::vehicle(std::string_view id) const {
  for (const auto& v : vehicles) {
    if (v.id == id) return v;
  }
  throw std::out_of_range("no vehicle " + std::string(id));
}

std::optional<Leg> RoadGeometry::leg_of(Vec2 p) const {
  if (!is_junction() || in_region(p)) return std::nullopt;
  Leg best = Leg::south;
  double best_dot = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    const Leg leg = static_cast<Leg>(i);
    const double d = dot(p, leg_direction(leg));
    if (d > best_dot) {
      best_dot = d;
      best = leg;
    }
  }
  for (const auto& r : roads) {
    if (r.leg == best) return best;
  }
  return std::nullopt;
}

LaneRef RoadGeometry::locate(Vec2 p) const {
  LaneRef ref;
  int road = 0;
  if (is_junction()) {
    if (in_region(p)) {
      ref.lane = "junction";
      ref.in_region = true;
      return ref;
    }
    const auto leg = leg_of(p);
    if (!leg) {
      ref.lane = "offroad";
      return ref;
    }
    for (std::size_t i = 0; i < roads.size(); ++i) {
      if (roads[i].leg == leg) road = static_cast<int>(i);
    }
  }
  const auto proj = roads[static_cast<std::size_t>(road)].path.project(p);
  ref.road = road;
  ref.s = proj.s;
  ref.offset = proj.offset;
  const int n = lanes_per_direction;
  const double o = proj.offset;
  if (std::abs(o) > n * kLaneWidth + kLaneWidth) {
    ref.lane = "offroad";
    return ref;
  }
  const int dir = o <= 0.0 ? 1 : -1;
  const int idx = std::min(static_cast<int>(std::floor(std::abs(o) / kLaneWidth)), n - 1);
  const double center = -dir * (idx + 0.5) * kLaneWidth;
  ref.lane_index = idx;
  ref.lat = o - center;
  ref.lane = roads[static_cast<std::size_t>(road)].id + (dir > 0 ? "/+/" : "/-/") + std::to_string(idx);
  return ref;
}

nlohmann::json RoadGeometry::to_json() const {
  nlohmann::json j;
  j["town"] = synth::town_name(town);
  j["topology"] = dsl::to_token(topology);
  j["lanes_per_direction"] = lanes_per_direction;
  j["marker"] = dsl::to_token(marker);
  j["region_half"] = region_half;
  j["speed_limit"] = speed_limit;
  j["conflict_station"] = conflict_station;
  j["roads"] = nlohmann::json::array();
  for (const auto& r : roads) {
    j["roads"].push_back({{"id", r.id}, {"path", r.path.to_json()}});
  }
  j["lanes"] = nlohmann::json::array();
  for (const auto& l : lanes) {
    j["lanes"].push_back({{"id", l.id},
                          {"direction", l.direction},
                          {"offset", l.offset},
                          {"width", kLaneWidth},
                          {"marker", dsl::to_token(l.marker)}});
  }
  j["approaches"] = nlohmann::json::array();
  for (const auto& a : approaches) {
    nlohmann::json aj{{"name", a.name},
                      {"control", control_name(a.control)},
                      {"stop_line", {{a.stop_line_a.x, a.stop_line_a.y}, {a.stop_line_b.x, a.stop_line_b.y}}}};
    if (a.signal) {
      aj["signal"] = {{"cycle_s", a.signal->cycle_s},
                      {"green_s", a.signal->green_s},
                      {"yellow_s", a.signal->yellow_s},
                      {"offset_s", a.signal->offset_s}};
    }
    j["approaches"].push_back(aj);
  }
  j["conflict_region"] = nlohmann::json::array();
  for (const auto& c : conflict_region) j["conflict_region"].push_back({c.x, c.y});
  j["vehicles"] = nlohmann::json::array();
  for (const auto& v : vehicles) {
    j["vehicles"].push_back(
        {{"id", v.id}, {"actor_type", dsl::to_token(v.actor_type)}, {"length", v.length}, {"width", v.width}});
  }
  return j;
}

std::uint64_t RoadGeometry::digest() const { return fnv1a64(to_json().dump()); }

namespace {

void add_lanes(RoadGeometry& g, int road) {
  for (int dir : {1, -1}) {
    for (int i = 0; i < g.lanes_per_direction; ++i) {
      Lane lane;
      lane.road = road;
      lane.direction = dir;
      lane.index = i;
      lane.offset = -dir * (i + 0.5) * kLaneWidth;
      lane.id = g.roads[static_cast<std::size_t>(road)].id + (dir > 0 ? "/+/" : "/-/") + std::to_string(i);
      // The centerline carries the scenario marker; lane dividers are broken.
      lane.marker = i == 0 ? g.marker : dsl::RoadMarker::broken_line;
      g.lanes.push_back(lane);
    }
  }
}

bool has_sign(const synth::TemplateParams& p, dsl::TrafficSign s) {
  return std::find(p.signs.begin(), p.signs.end(), s) != p.signs.end();
}

}  // namespace

RoadGeometry build_geometry(const synth::ScenarioTemplate& tmpl) {
  const auto& p = tmpl.params;
  RoadGeometry g;
  g.town = p.town;
  g.topology = p.topology;
  g.lanes_per_direction = std::max(1, p.lanes);
  g.marker = p.marker == dsl::RoadMarker::not_mentioned ? dsl::RoadMarker::broken_line : p.marker;
  g.speed_limit = p.speed_limit;
  for (const auto& a : p.actors) g.vehicles.push_back(footprint_for(a.actor_id, a.actor_type));

  if (p.topology == dsl::RoadType::straight) {
    g.roads.push_back({"main", Path::line({0.0, 0.0}, {1.0, 0.0}, kStraightLength), std::nullopt});
    g.conflict_station = kStraightLength / 2.0;
    add_lanes(g, 0);
    return g;
  }
  if (p.topology == dsl::RoadType::curve) {
    const double sweep = kCurveSweepDeg * std::numbers::pi / 180.0;
    Path path = Path::line({0.0, 0.0}, {1.0, 0.0}, kCurveLead);
    path.then_arc(kCurveRadius, sweep).then_line(kCurveLead);
    g.roads.push_back({"main", path, std::nullopt});
    g.conflict_station = kCurveLead + kCurveRadius * sweep / 2.0;
    add_lanes(g, 0);
    return g;
  }

  const double w = g.lanes_per_direction * kLaneWidth;
  g.region_half = w;
  g.conflict_region = {{-w, -w}, {w, -w}, {w, w}, {-w, w}};
  const auto layout = synth::junction_layout(p);
  const bool signals = has_sign(p, dsl::TrafficSign::traffic_light);
  const bool stops = has_sign(p, dsl::TrafficSign::stop_sign);
  for (int i = 0; i < 4; ++i) {
    const Leg leg = static_cast<Leg>(i);
    if (!layout.has(leg)) continue;
    const Vec2 d = leg_direction(leg);
    g.roads.push_back({std::string(leg_name(leg)), Path::line(d * w, d, kLegLength), leg});
    add_lanes(g, static_cast<int>(g.roads.size()) - 1);

    Approach a;
    a.leg = leg;
    a.name = std::string(leg_name(leg));
    const Vec2 left{-d.y, d.x};
    a.stop_line_a = d * (w + kStopLineSetback);
    a.stop_line_b = a.stop_line_a + left * w;
    const bool cross = leg == Leg::east || leg == Leg::west;
    const bool minor = layout.t_junction ? leg == layout.stem : cross;
    if (signals) {
      a.control = Control::signal;
      a.signal = SignalSchedule{30.0, 12.0, 3.0, cross ? 15.0 : 0.0};
    } else if (stops && minor) {
      a.control = Control::stop;
    } else if (layout.t_junction && leg == layout.stem) {
      a.control = Control::yield;
    }
    g.approaches.push_back(a);
  }
  return g;
}

}  // namespace scenforge::sim
