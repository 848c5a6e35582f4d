#include "scenforge/sim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>

#include "scenforge/common/digest.hpp"
#include "scenforge/common/number_format.hpp"

namespace scenforge::sim {
namespace {

using dsl::Behavior;
using synth::Leg;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBackgroundJunctionDist = 40.0;

struct Motion {
  std::string id;
  std::shared_ptr<const Path> path;
  int quarters = 0;
  int dir = 1;
  double base_offset = 0.0;
  double s0 = 0.0;
  double v = 0.0;
  bool brakes = false;
  double brake_t0 = 0.0;
  double decel = kStopDecel;
  bool ramps = false;
  double ramp_start = kInf;
  double ramp_amount = kLaneWidth;

  double distance(double t) const {
    if (!brakes || t <= brake_t0) return v * t;
    const double tau = std::min(t - brake_t0, v / decel);
    return v * brake_t0 + v * tau - 0.5 * decel * tau * tau;
  }
  double speed(double t) const {
    if (!brakes || t <= brake_t0) return v;
    return std::max(0.0, v - decel * (t - brake_t0));
  }
  double station(double t) const { return s0 + dir * distance(t); }
  double lat(double t) const {
    if (t <= ramp_start) return 0.0;
    return ramp_amount * std::min(1.0, (t - ramp_start) / kRampDuration);
  }
  double lat_rate(double t) const {
    if (t < ramp_start || t >= ramp_start + kRampDuration) return 0.0;
    return ramp_amount / kRampDuration;
  }

  Pose pose(double t) const {
    const Pose ref = path->pose(station(t));
    const Vec2 left = left_normal(ref.heading);
    Vec2 p = ref.p + left * (base_offset + dir * lat(t));
    double heading = ref.heading + (dir < 0 ? std::numbers::pi : 0.0) + std::atan2(lat_rate(t), speed(t));
    if (quarters != 0) {
      p = rotate_quarter(p, quarters);
      heading += quarters * std::numbers::pi / 2.0;
    }
    return {p, normalize_angle(heading)};
  }
};

std::shared_ptr<const Path> junction_prototype(double w, Behavior behavior) {
  const double x = kLaneWidth / 2.0;
  auto path = std::make_shared<Path>(Path::line({x, -w - kLegLength}, {0.0, 1.0}, kLegLength));
  switch (behavior) {
    case Behavior::turn_left: path->then_arc(w + x, std::numbers::pi / 2.0); break;
    case Behavior::turn_right: path->then_arc(w - x, -std::numbers::pi / 2.0); break;
    default: path->then_line(2.0 * w); break;
  }
  path->then_line(kLegLength);
  return path;
}

void apply_behavior(Motion& m, Behavior behavior, double speed, std::optional<double> distance_to_stop) {
  m.v = behavior == Behavior::static_ ? 0.0 : speed;
  if (behavior != Behavior::stop || m.v <= 0.0) return;
  m.brakes = true;
  if (!distance_to_stop) return;
  // Come to rest with the front bumper on the stop line.
  const double d = std::max(*distance_to_stop, 0.01);
  const double needed = m.v * m.v / (2.0 * kStopDecel);
  if (d >= needed) {
    m.brake_t0 = (d - needed) / m.v;
  } else {
    m.decel = m.v * m.v / (2.0 * d);
  }
}

std::vector<Motion> plan(const synth::ScenarioTemplate& tmpl, const sampler::ScenarioInstance& inst,
                         const RoadGeometry& g) {
  const auto& p = tmpl.params;
  const double ego_speed = inst.binding(synth::kEgoSpeed);
  const double npc_speed = inst.binding(synth::kNpcSpeed);
  const double ego_dist = inst.binding(synth::kEgoInitDist);
  const double npc_dist = inst.binding(synth::kNpcInitDist);
  const auto speed_of = [&](const synth::ActorParams& a) {
    if (a.role == synth::Role::ego) return ego_speed;
    if (a.role == synth::Role::adversary) return npc_speed;
    const auto it = inst.fixed.find("speed." + a.actor_id);
    return it != inst.fixed.end() ? it->second : a.base_speed;
  };

  std::vector<Motion> out;
  if (g.is_junction()) {
    const double w = g.region_half;
    std::map<Behavior, std::shared_ptr<const Path>> protos;
    int background = 0;
    for (const auto& a : p.actors) {
      Motion m;
      m.id = a.actor_id;
      auto& proto = protos[a.behavior];
      if (!proto) proto = junction_prototype(w, a.behavior);
      m.path = proto;
      const Leg entry = synth::actor_entry_leg(p, a);
      m.quarters = static_cast<int>(entry);
      const double len = g.vehicle(a.actor_id).length;
      double front_dist = 0.0;
      const double v = speed_of(a);
      if (a.role == synth::Role::ego) {
        front_dist = ego_dist;
      } else if (a.role == synth::Role::adversary) {
        // Same arrival time at the region as the ego.
        front_dist = ego_speed > 0.0 ? ego_dist * v / ego_speed : ego_dist;
      } else {
        front_dist = kBackgroundJunctionDist + 10.0 * background++;
      }
      m.s0 = kLegLength - front_dist - len / 2.0;
      apply_behavior(m, a.behavior, v, front_dist - kStopLineSetback);
      out.push_back(std::move(m));
    }
    return out;
  }

  auto ref = std::make_shared<const Path>(g.roads.front().path);
  const double sc = g.conflict_station;
  const double ego_s0 = sc - ego_dist;
  const auto lane_offset = [](int dir, int idx) { return -dir * (idx + 0.5) * kLaneWidth; };
  int ahead = 0, behind = 0, oncoming = 0;
  for (const auto& a : p.actors) {
    Motion m;
    m.id = a.actor_id;
    m.path = ref;
    const double v = speed_of(a);
    if (a.role == synth::Role::ego) {
      m.s0 = ego_s0;
      m.base_offset = lane_offset(1, 0);
    } else if (a.role == synth::Role::adversary) {
      if (p.configuration == synth::Configuration::head_on) {
        m.dir = -1;
        m.s0 = sc + npc_dist;
        m.base_offset = lane_offset(-1, 0);
        m.ramps = a.behavior != Behavior::static_;
      } else {
        m.s0 = ego_s0 + npc_dist;
        m.base_offset = lane_offset(1, 0);
      }
    } else {
      const auto heading = a.position->heading_relation.value_or(dsl::HeadingRelation::same_direction);
      const auto spatial = a.position->spatial_relation;
      if (heading == dsl::HeadingRelation::opposite_direction) {
        m.dir = -1;
        m.s0 = sc + 2.0 * kBackgroundGap + 10.0 * oncoming++;
        m.base_offset = lane_offset(-1, 0);
      } else if ((spatial == dsl::SpatialRelation::left || spatial == dsl::SpatialRelation::right) &&
                 g.lanes_per_direction > 1) {
        m.s0 = ego_s0;
        m.base_offset = lane_offset(1, 1);
      } else if (spatial == dsl::SpatialRelation::behind) {
        m.s0 = ego_s0 - kBackgroundGap - 10.0 * behind++;
        m.base_offset = lane_offset(1, 0);
      } else {
        m.s0 = ego_s0 + kBackgroundGap + 10.0 * ahead++;
        m.base_offset = lane_offset(1, 0);
      }
    }
    apply_behavior(m, a.behavior, v, std::nullopt);
    out.push_back(std::move(m));
  }
  return out;
}

ActorState quantized_state(const Motion& m, double t, const RoadGeometry& g) {
  const Pose pose = m.pose(t);
  ActorState s;
  s.id = m.id;
  s.x = quantize_sig6(pose.p.x);
  s.y = quantize_sig6(pose.p.y);
  s.heading = quantize_sig6(pose.heading);
  s.speed = quantize_sig6(m.speed(t));
  const LaneRef ref = g.locate({s.x, s.y});
  s.lane = ref.lane;
  s.lat = quantize_sig6(ref.lat);
  return s;
}

std::string json_string(std::string_view s) { return nlohmann::json(std::string(s)).dump(); }

}  // namespace

const ActorState& Frame::actor(std::string_view id) const {
  for (const auto& a : actors) {
    if (a.id == id) return a;
  }
  throw std::out_of_range("frame has no actor " + std::string(id));
}

Obb footprint(const ActorState& s, const VehicleInfo& v) { return {s.position(), s.heading, v.length, v.width}; }

Trace simulate(const synth::ScenarioTemplate& tmpl, const sampler::ScenarioInstance& instance,
               const RoadGeometry& geometry) {
  if (synth::template_digest(tmpl) != instance.template_digest) {
    throw DigestMismatch("instance " + std::to_string(instance.instance_seed) + " was sampled from another template");
  }
  if (build_geometry(tmpl).digest() != geometry.digest()) {
    throw DigestMismatch("road geometry does not belong to template " + tmpl.params.scenario_id);
  }
  auto motions = plan(tmpl, instance, geometry);

  Motion* ego = nullptr;
  Motion* ramping = nullptr;
  for (auto& m : motions) {
    if (m.id == dsl::kEgoId) ego = &m;
    if (m.ramps) ramping = &m;
  }

  Trace trace;
  trace.scenario_id = tmpl.params.scenario_id;
  trace.instance_seed = instance.instance_seed;
  trace.geometry_ref = geometry.digest();

  std::vector<Obb> boxes(motions.size());
  std::vector<const VehicleInfo*> vehicles;
  for (const auto& m : motions) vehicles.push_back(&geometry.vehicle(m.id));
  int last_frame = kHorizonFrames;
  bool collided = false;
  for (int k = 0; k <= last_frame; ++k) {
    const double t = k * kTimestep;
    if (ramping && ego && ramping->ramp_start == kInf) {
      // The head-on adversary starts its lane departure once the gap has
      // closed to its initial distance.
      const double gap = ramping->station(t) - ego->station(t);
      if (gap <= instance.binding(synth::kNpcInitDist)) ramping->ramp_start = t;
    }
    Frame frame;
    frame.t = quantize_sig6(t);
    frame.actors.reserve(motions.size());
    for (const auto& m : motions) frame.actors.push_back(quantized_state(m, t, geometry));
    for (const auto& a : geometry.approaches) {
      if (a.signal) frame.signals.push_back({a.name, a.signal->state(t)});
    }
    if (!collided) {
      for (std::size_t i = 0; i < motions.size(); ++i) boxes[i] = footprint(frame.actors[i], *vehicles[i]);
      for (std::size_t i = 0; i < motions.size() && !collided; ++i) {
        for (std::size_t j = i + 1; j < motions.size(); ++j) {
          if (overlaps(boxes[i], boxes[j])) {
            collided = true;
            last_frame = std::min(kHorizonFrames, k + static_cast<int>(std::lround(kPostCollision / kTimestep)));
            break;
          }
        }
      }
    }
    trace.frames.push_back(std::move(frame));
  }
  return trace;
}

std::vector<CollisionEvent> detect_collisions(const Trace& trace, const RoadGeometry& geometry) {
  std::vector<CollisionEvent> out;
  std::map<std::pair<std::string, std::string>, bool> seen;
  for (const auto& frame : trace.frames) {
    const auto& actors = frame.actors;
    for (std::size_t i = 0; i < actors.size(); ++i) {
      for (std::size_t j = i + 1; j < actors.size(); ++j) {
        auto key = std::minmax(actors[i].id, actors[j].id);
        const std::pair<std::string, std::string> k{key.first, key.second};
        if (seen.count(k)) continue;
        if (overlaps(footprint(actors[i], geometry.vehicle(actors[i].id)),
                     footprint(actors[j], geometry.vehicle(actors[j].id)))) {
          seen[k] = true;
          out.push_back({frame.t, k.first, k.second});
        }
      }
    }
  }
  return out;
}

std::string trace_text(const Trace& trace) {
  std::string out;
  out.reserve(trace.frames.size() * 200);
  for (const auto& f : trace.frames) {
    out += "{\"t\":";
    out += format_sig6(f.t);
    out += ",\"actors\":[";
    for (std::size_t i = 0; i < f.actors.size(); ++i) {
      const auto& a = f.actors[i];
      if (i) out += ',';
      out += "{\"id\":" + json_string(a.id);
      out += ",\"x\":" + format_sig6(a.x);
      out += ",\"y\":" + format_sig6(a.y);
      out += ",\"heading\":" + format_sig6(a.heading);
      out += ",\"speed\":" + format_sig6(a.speed);
      out += ",\"lane\":" + json_string(a.lane);
      out += ",\"lat\":" + format_sig6(a.lat);
      out += '}';
    }
    out += "],\"signals\":[";
    for (std::size_t i = 0; i < f.signals.size(); ++i) {
      if (i) out += ',';
      out += "{\"approach\":" + json_string(f.signals[i].approach);
      out += ",\"state\":" + json_string(signal_state_name(f.signals[i].state)) + '}';
    }
    out += "]}\n";
  }
  return out;
}

std::vector<Frame> parse_trace_frames(std::string_view text) {
  std::vector<Frame> frames;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    Frame f;
    f.t = j.at("t").get<double>();
    for (const auto& a : j.at("actors")) {
      f.actors.push_back({a.at("id").get<std::string>(), a.at("x").get<double>(), a.at("y").get<double>(),
                          a.at("heading").get<double>(), a.at("speed").get<double>(), a.at("lane").get<std::string>(),
                          a.at("lat").get<double>()});
    }
    for (const auto& s : j.at("signals")) {
      const auto name = s.at("state").get<std::string>();
      SignalState st = SignalState::green;
      if (name == "yellow") {
        st = SignalState::yellow;
      } else if (name == "red") {
        st = SignalState::red;
      } else if (name != "green") {
        throw std::invalid_argument("unknown signal state " + name);
      }
      f.signals.push_back({s.at("approach").get<std::string>(), st});
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace scenforge::sim
