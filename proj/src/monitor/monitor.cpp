#include "scenforge/monitor/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "scenforge/common/number_format.hpp"

namespace scenforge::monitor {
namespace {

using sim::ActorState;
using sim::Control;
using sim::RoadGeometry;
using sim::Trace;
using synth::Leg;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = 1e-9;

struct ActorFrame {
  const ActorState* state = nullptr;
  Vec2 p;
  Vec2 fwd;
  sim::LaneRef ref;
  int dir = 0;  // travel direction along the road path; 0 inside the region
  double length = 4.5;
  double width = 2.0;

  Vec2 front() const { return p + fwd * (length / 2.0); }
};

struct Context {
  const Trace& trace;
  const RoadGeometry& g;
  std::vector<std::string> ids;
  std::vector<std::vector<ActorFrame>> frames;  // [frame][actor]

  Context(const Trace& t, const RoadGeometry& geometry) : trace(t), g(geometry) {
    if (!t.frames.empty()) {
      for (const auto& a : t.frames.front().actors) ids.push_back(a.id);
    }
    frames.reserve(t.frames.size());
    for (const auto& f : t.frames) {
      std::vector<ActorFrame> row;
      row.reserve(f.actors.size());
      for (const auto& a : f.actors) {
        ActorFrame af;
        af.state = &a;
        af.p = a.position();
        af.fwd = unit_from_angle(a.heading);
        af.ref = g.locate(af.p);
        const auto& v = g.vehicle(a.id);
        af.length = v.length;
        af.width = v.width;
        if (af.ref.road >= 0) {
          const auto tangent = unit_from_angle(g.roads[static_cast<std::size_t>(af.ref.road)].path.pose(af.ref.s).heading);
          af.dir = dot(af.fwd, tangent) >= 0.0 ? 1 : -1;
        }
        row.push_back(af);
      }
      frames.push_back(std::move(row));
    }
  }

  double t(std::size_t k) const { return trace.frames[k].t; }
  std::size_t n_actors() const { return ids.size(); }
};

/// Collapses per-frame flags into maximal runs of consecutive frames.
struct RunBuilder {
  struct Run {
    std::size_t first = 0;
    std::size_t last = 0;
    std::map<std::string, double> evidence;
  };
  std::vector<Run> runs;
  bool open = false;

  void flag(std::size_t k, const std::map<std::string, double>& ev) {
    if (!open || runs.back().last + 1 != k) {
      runs.push_back({k, k, {}});
      open = true;
    }
    auto& run = runs.back();
    run.last = k;
    for (const auto& [name, value] : ev) {
      auto it = run.evidence.find(name);
      if (it == run.evidence.end()) {
        run.evidence[name] = value;
      } else if (name.rfind("min_", 0) == 0) {
        it->second = std::min(it->second, value);
      } else {
        it->second = std::max(it->second, value);
      }
    }
  }
};

void emit_runs(const Context& c, int rule_id, const std::string& actor, const RunBuilder& rb, double min_duration,
               std::vector<Violation>& out) {
  for (const auto& run : rb.runs) {
    const double t0 = c.t(run.first);
    const double t1 = c.t(run.last);
    if (t1 - t0 + kEps < min_duration) continue;
    out.push_back({rule_id, actor, t0, t1, run.evidence});
  }
}

double param(const RuleSpec& r, const char* name) { return r.parameters.at(name); }

// ---------------------------------------------------------------------------
// speed and headway

std::vector<Violation> eval_speed(const RuleSpec& r, const Context& c) {
  const double limit = r.rule_id == 22349 ? param(r, "max_speed") : c.g.speed_limit;
  const double thr = limit + param(r, "tolerance");
  std::vector<Violation> out;
  for (std::size_t i = 0; i < c.n_actors(); ++i) {
    RunBuilder speed_runs, headway_runs;
    for (std::size_t k = 0; k < c.frames.size(); ++k) {
      const auto& a = c.frames[k][i];
      const double v = a.state->speed;
      if (v > thr) speed_runs.flag(k, {{"max_speed", v}, {"limit", limit}});
      if (r.rule_id != 22350 || v <= 0.0) continue;
      if (a.ref.road < 0 || a.ref.in_region || a.ref.lane == "offroad") continue;
      double best_gap = kInf;
      for (std::size_t j = 0; j < c.n_actors(); ++j) {
        if (j == i) continue;
        const auto& b = c.frames[k][j];
        if (b.ref.lane != a.ref.lane || dot(a.fwd, b.fwd) <= 0.0) continue;
        const double ahead = dot(b.p - a.p, a.fwd);
        if (ahead <= 0.0) continue;
        best_gap = std::min(best_gap, distance(a.p, b.p) - (a.length + b.length) / 2.0);
      }
      const double headway_s = param(r, "headway_s");
      if (best_gap < headway_s * v) headway_runs.flag(k, {{"min_headway_s", std::max(0.0, best_gap) / v}});
    }
    emit_runs(c, r.rule_id, c.ids[i], speed_runs, param(r, "sustain_s"), out);
    emit_runs(c, r.rule_id, c.ids[i], headway_runs, param(r, "sustain_s"), out);
  }
  return out;
}

// ---------------------------------------------------------------------------
// stop lines: signals and stop signs

struct LineCrossing {
  std::size_t actor = 0;
  std::size_t frame = 0;
  const sim::Approach* approach = nullptr;
  double min_zone_speed = kInf;
};

/// Station of a point along a junction leg, measured outward from the region edge.
double leg_station(const RoadGeometry& g, Leg leg, Vec2 p) { return dot(p, sim::leg_direction(leg)) - g.region_half; }

std::vector<LineCrossing> line_crossings(const Context& c, double zone_m) {
  std::vector<LineCrossing> out;
  if (!c.g.is_junction()) return out;
  for (std::size_t i = 0; i < c.n_actors(); ++i) {
    for (const auto& ap : c.g.approaches) {
      double min_zone = kInf;
      double last_speed = kInf;
      bool tracking = false;
      for (std::size_t k = 0; k < c.frames.size(); ++k) {
        const auto& a = c.frames[k][i];
        const auto leg = c.g.leg_of(a.p);
        const bool inbound = dot(a.fwd, sim::leg_direction(ap.leg)) < 0.0;
        const double sf = leg_station(c.g, ap.leg, a.front());
        const bool on_leg = leg == ap.leg && inbound;
        if (on_leg && sf >= sim::kStopLineSetback) {
          tracking = true;
          last_speed = a.state->speed;
          if (sf <= sim::kStopLineSetback + zone_m) min_zone = std::min(min_zone, a.state->speed);
          continue;
        }
        if (tracking && sf < sim::kStopLineSetback && (on_leg || a.ref.in_region)) {
          out.push_back({i, k, &ap, min_zone == kInf ? last_speed : min_zone});
        }
        tracking = false;
        min_zone = kInf;
      }
    }
  }
  return out;
}

std::vector<Violation> eval_stop_sign(const RuleSpec& r, const Context& c) {
  std::vector<Violation> out;
  for (const auto& x : line_crossings(c, param(r, "zone_m"))) {
    if (x.approach->control != Control::stop) continue;
    if (x.min_zone_speed <= param(r, "min_speed")) continue;
    const double t = c.t(x.frame);
    out.push_back({r.rule_id, c.ids[x.actor], t, t, {{"min_zone_speed", x.min_zone_speed}}});
  }
  return out;
}

std::optional<sim::SignalState> signal_at(const Context& c, std::size_t k, const std::string& approach) {
  for (const auto& s : c.trace.frames[k].signals) {
    if (s.approach == approach) return s.state;
  }
  return std::nullopt;
}

std::vector<Violation> eval_red_light(const RuleSpec& r, const Context& c) {
  std::vector<Violation> out;
  for (const auto& x : line_crossings(c, 5.0)) {
    if (x.approach->control != Control::signal) continue;
    if (signal_at(c, x.frame, x.approach->name) != sim::SignalState::red) continue;
    const double t = c.t(x.frame);
    out.push_back({r.rule_id, c.ids[x.actor], t, t, {{"speed", c.frames[x.frame][x.actor].state->speed}}});
  }
  return out;
}

// ---------------------------------------------------------------------------
// centerline crossings

struct Crossing {
  bool across = false;
  double depth = 0.0;  // how far the deepest corner reaches past the centerline
};

Crossing centerline_crossing(const Context& c, const ActorFrame& a) {
  Crossing out;
  if (a.ref.road < 0 || a.ref.in_region || a.ref.lane == "offroad") return out;
  const auto& path = c.g.roads[static_cast<std::size_t>(a.ref.road)].path;
  const sim::Obb box{a.p, a.state->heading, a.length, a.width};
  for (const auto& corner : box.corners()) {
    if (c.g.in_region(corner)) continue;
    const double into_opposing = a.dir * path.project(corner).offset;
    if (into_opposing > 0.0) {
      out.across = true;
      out.depth = std::max(out.depth, into_opposing);
    }
  }
  return out;
}

std::optional<double> oncoming_gap(const Context& c, std::size_t k, std::size_t i, double range) {
  const auto& a = c.frames[k][i];
  std::optional<double> best;
  for (std::size_t j = 0; j < c.n_actors(); ++j) {
    if (j == i) continue;
    const auto& b = c.frames[k][j];
    if (b.ref.road != a.ref.road || b.ref.in_region || b.dir != -a.dir) continue;
    const double gap = a.dir * (b.ref.s - a.ref.s);
    if (gap >= 0.0 && gap <= range && (!best || gap < *best)) best = gap;
  }
  return best;
}

double lane_keeping_time(const Context& c, std::size_t i, std::size_t k0, std::size_t k1, double tolerance) {
  // Longest run of frames in [k0, k1] with the actor off its lane center by
  // more than the free space between footprint and lane edges.
  double best = 0.0;
  std::optional<std::size_t> start;
  for (std::size_t k = k0; k <= k1; ++k) {
    const auto& a = c.frames[k][i];
    const bool off = a.ref.road >= 0 && !a.ref.in_region && std::abs(a.state->lat) > tolerance;
    if (off && !start) start = k;
    if ((!off || k == k1) && start) {
      const std::size_t end = off ? k : k - 1;
      best = std::max(best, c.t(end) - c.t(*start) + c.trace.timestep_s);
      start.reset();
    }
  }
  return best;
}

std::vector<Violation> eval_centerline(const RuleSpec& r, const Context& c) {
  std::vector<Violation> out;
  const bool solid_rule = r.rule_id == 21460;
  if (solid_rule && c.g.marker != dsl::RoadMarker::solid_line) return out;
  for (std::size_t i = 0; i < c.n_actors(); ++i) {
    RunBuilder rb;
    for (std::size_t k = 0; k < c.frames.size(); ++k) {
      const auto cross = centerline_crossing(c, c.frames[k][i]);
      if (!cross.across) continue;
      if (solid_rule) {
        rb.flag(k, {{"max_crossing_m", cross.depth}});
      } else if (const auto gap = oncoming_gap(c, k, i, param(r, "oncoming_range_m"))) {
        rb.flag(k, {{"max_crossing_m", cross.depth}, {"min_oncoming_gap_m", *gap}});
      }
    }
    for (auto& run : rb.runs) {
      const double kept_off = lane_keeping_time(c, i, run.first, run.last, param(r, "lane_keeping_m"));
      if (kept_off + kEps >= param(r, "lane_keeping_s")) run.evidence["lane_keeping_s"] = kept_off;
    }
    emit_runs(c, r.rule_id, c.ids[i], rb, 0.0, out);
  }
  return out;
}

// ---------------------------------------------------------------------------
// lane maneuvers

std::vector<Violation> eval_lane_change(const RuleSpec& r, const Context& c) {
  std::vector<Violation> out;
  for (std::size_t i = 0; i < c.n_actors(); ++i) {
    for (std::size_t k = 1; k < c.frames.size(); ++k) {
      const auto& prev = c.frames[k - 1][i];
      const auto& cur = c.frames[k][i];
      if (prev.ref.road < 0 || cur.ref.road != prev.ref.road || prev.ref.lane == cur.ref.lane) continue;
      if (prev.ref.in_region || cur.ref.in_region) continue;
      // Same-direction lanes share the side of the centerline.
      if ((prev.ref.offset <= 0.0) != (cur.ref.offset <= 0.0)) continue;
      const double t = c.t(k);
      if (r.rule_id == 22107) {
        const double v = cur.state->speed;
        for (std::size_t j = 0; j < c.n_actors(); ++j) {
          if (j == i) continue;
          const auto& b = c.frames[k][j];
          if (b.ref.road != cur.ref.road || b.ref.in_region) continue;
          const double gap = std::abs(b.ref.s - cur.ref.s);
          if (v > 0.0 && gap < param(r, "headway_s") * v) {
            out.push_back({r.rule_id, c.ids[i], t, t, {{"min_headway_s", gap / v}}});
            break;
          }
        }
      } else if (c.g.is_junction()) {
        const auto leg = c.g.leg_of(cur.p);
        if (!leg) continue;
        const double sf = leg_station(c.g, *leg, cur.front());
        if (sf <= param(r, "junction_distance_m")) out.push_back({r.rule_id, c.ids[i], t, t, {{"distance_m", sf}}});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// right of way

struct Arrival {
  std::size_t actor = 0;
  Leg leg = Leg::south;
  double t = kInf;
  bool entered = false;
  std::optional<Leg> exit;
  std::optional<sim::SignalState> signal;
  Control control = Control::none;

  bool left_turn() const { return exit && (static_cast<int>(*exit) - static_cast<int>(leg) + 4) % 4 == 3; }
};

std::vector<Arrival> arrivals(const Context& c) {
  std::vector<Arrival> out;
  if (c.frames.empty()) return out;
  for (std::size_t i = 0; i < c.n_actors(); ++i) {
    std::optional<Leg> leg;
    std::optional<std::size_t> entry;
    for (std::size_t k = 0; k < c.frames.size(); ++k) {
      const auto& a = c.frames[k][i];
      if (c.g.in_region(a.front())) {
        if (leg) entry = k;
        break;
      }
      const auto l = c.g.leg_of(a.p);
      leg = l && dot(a.fwd, sim::leg_direction(*l)) < 0.0 ? l : std::nullopt;
    }
    if (!leg) continue;
    Arrival arr;
    arr.actor = i;
    arr.leg = *leg;
    if (const auto* ap = c.g.approach(*leg)) arr.control = ap->control;
    if (entry) {
      arr.entered = true;
      arr.t = c.t(*entry);
      if (const auto* ap = c.g.approach(*leg)) arr.signal = signal_at(c, *entry, ap->name);
      for (std::size_t k = *entry + 1; k < c.frames.size(); ++k) {
        const auto& a = c.frames[k][i];
        if (!c.g.in_region(a.p) && !c.g.in_region(a.front())) {
          arr.exit = c.g.leg_of(a.p);
          break;
        }
      }
    } else {
      // Predicted arrival from the last frame.
      const auto& a = c.frames.back()[i];
      const double d = leg_station(c.g, *leg, a.front());
      if (a.state->speed > 0.0) arr.t = c.t(c.frames.size() - 1) + d / a.state->speed;
    }
    out.push_back(arr);
  }
  return out;
}

bool controlled(Control c) { return c == Control::stop || c == Control::yield; }

/// True when b may proceed before a.
bool has_priority(const Arrival& b, const Arrival& a, double tie_s) {
  if (a.signal && b.signal) {
    const bool a_red = *a.signal == sim::SignalState::red;
    const bool b_red = *b.signal == sim::SignalState::red;
    if (a_red != b_red) return a_red;
  }
  if (controlled(a.control) != controlled(b.control)) return controlled(a.control);
  const bool opposite = (static_cast<int>(b.leg) - static_cast<int>(a.leg) + 4) % 4 == 2;
  if (opposite && a.left_turn() != b.left_turn()) return a.left_turn();
  if (b.t < a.t - tie_s) return true;
  if (a.t < b.t - tie_s) return false;
  return (static_cast<int>(b.leg) - static_cast<int>(a.leg) + 4) % 4 == 1;
}

int right_of_way_rule(const Arrival& a, const Arrival& b) {
  if (a.control == Control::stop) return 21802;
  if (a.control == Control::yield) return 21803;
  const bool opposite = (static_cast<int>(b.leg) - static_cast<int>(a.leg) + 4) % 4 == 2;
  if (a.left_turn() && opposite) return 21801;
  return 21800;
}

std::vector<Violation> eval_right_of_way(const RuleSpec& r, const Context& c) {
  std::vector<Violation> out;
  if (!c.g.is_junction()) return out;
  const auto arr = arrivals(c);
  for (const auto& a : arr) {
    if (!a.entered) continue;
    for (const auto& b : arr) {
      if (b.actor == a.actor || b.leg == a.leg) continue;
      if (std::abs(b.t - a.t) > param(r, "window_s")) continue;
      if (!has_priority(b, a, param(r, "tie_s"))) continue;
      if (right_of_way_rule(a, b) != r.rule_id) continue;
      out.push_back({r.rule_id, c.ids[a.actor], a.t, a.t, {{"arrival_gap_s", b.t - a.t}}});
      break;
    }
  }
  return out;
}

std::vector<Violation> merge(std::vector<Violation> v, double step) {
  std::sort(v.begin(), v.end(), [](const Violation& a, const Violation& b) {
    return std::tie(a.rule_id, a.actor_id, a.t_start, a.t_end) < std::tie(b.rule_id, b.actor_id, b.t_start, b.t_end);
  });
  std::vector<Violation> out;
  for (auto& x : v) {
    if (!out.empty() && out.back().rule_id == x.rule_id && out.back().actor_id == x.actor_id &&
        x.t_start <= out.back().t_end + step + kEps) {
      auto& m = out.back();
      m.t_end = std::max(m.t_end, x.t_end);
      for (const auto& [k, val] : x.evidence) {
        auto it = m.evidence.find(k);
        if (it == m.evidence.end()) {
          m.evidence[k] = val;
        } else {
          it->second = k.rfind("min_", 0) == 0 || k == "arrival_gap_s" ? std::min(it->second, val)
                                                                       : std::max(it->second, val);
        }
      }
      continue;
    }
    out.push_back(std::move(x));
  }
  for (auto& x : out) {
    x.t_start = quantize_sig6(x.t_start);
    x.t_end = quantize_sig6(x.t_end);
    for (auto& [k, val] : x.evidence) val = quantize_sig6(val);
  }
  return out;
}

RuleSpec make(int id, Category cat, std::map<std::string, double> params) { return {id, cat, std::move(params)}; }

}  // namespace

std::string_view category_name(Category c) {
  switch (c) {
    case Category::right_of_way: return "right_of_way";
    case Category::signal: return "signal";
    case Category::stop_sign: return "stop_sign";
    case Category::speed: return "speed";
    case Category::overtaking: return "overtaking";
    case Category::lane_maneuver: return "lane_maneuver";
    case Category::headway: return "headway";
    case Category::lane_keeping: return "lane_keeping";
  }
  return "?";
}

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::rule_violation: return "rule_violation";
    case Outcome::collision: return "collision";
    case Outcome::both: return "both";
    case Outcome::clean: return "clean";
  }
  return "?";
}

const std::vector<RuleSpec>& registry() {
  static const std::vector<RuleSpec> rules = [] {
    const std::map<std::string, double> row{{"window_s", 2.0}, {"tie_s", 0.5}};
    const std::map<std::string, double> line{
        {"oncoming_range_m", 30.0}, {"lane_keeping_m", (sim::kLaneWidth - 2.0) / 2.0}, {"lane_keeping_s", 0.5}};
    return std::vector<RuleSpec>{
        make(21453, Category::signal, {}),
        make(21460, Category::lane_keeping, line),
        make(21461, Category::overtaking, line),
        make(21800, Category::right_of_way, row),
        make(21801, Category::right_of_way, row),
        make(21802, Category::right_of_way, row),
        make(21803, Category::right_of_way, row),
        make(21804, Category::right_of_way, row),
        make(22107, Category::lane_maneuver, {{"headway_s", 2.0}}),
        make(22108, Category::lane_maneuver, {{"junction_distance_m", 2.0}}),
        make(22349, Category::speed, {{"max_speed", 29.06}, {"tolerance", 0.5}, {"sustain_s", 1.0}}),
        make(22350, Category::speed, {{"tolerance", 0.5}, {"sustain_s", 1.0}, {"headway_s", 2.0}}),
        make(22450, Category::stop_sign, {{"zone_m", 5.0}, {"min_speed", 0.1}}),
    };
  }();
  return rules;
}

const RuleSpec& rule(int rule_id) {
  for (const auto& r : registry()) {
    if (r.rule_id == rule_id) return r;
  }
  throw RegistryError("rule " + std::to_string(rule_id) + " is not in the registry");
}

std::vector<int> ViolationReport::distinct_rules() const {
  std::set<int> ids;
  for (const auto& v : violations) ids.insert(v.rule_id);
  return {ids.begin(), ids.end()};
}

namespace {

void check_geometry(const Trace& trace, const RoadGeometry& geometry) {
  if (trace.geometry_ref != 0 && trace.geometry_ref != geometry.digest()) {
    throw std::invalid_argument("trace was simulated on a different road geometry");
  }
}

std::vector<Violation> evaluate(const RuleSpec& r, const Context& c) {
  rule(r.rule_id);
  std::vector<Violation> raw;
  switch (r.category) {
    case Category::speed:
    case Category::headway: raw = eval_speed(r, c); break;
    case Category::stop_sign: raw = eval_stop_sign(r, c); break;
    case Category::signal: raw = eval_red_light(r, c); break;
    case Category::lane_keeping:
    case Category::overtaking: raw = eval_centerline(r, c); break;
    case Category::lane_maneuver: raw = eval_lane_change(r, c); break;
    case Category::right_of_way: raw = eval_right_of_way(r, c); break;
  }
  return merge(std::move(raw), c.trace.timestep_s);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

std::vector<Violation> evaluate_rule(const RuleSpec& r, const Trace& trace, const RoadGeometry& geometry) {
  check_geometry(trace, geometry);
  return evaluate(r, Context(trace, geometry));
}

std::vector<Violation> evaluate_rule(int rule_id, const Trace& trace, const RoadGeometry& geometry) {
  return evaluate_rule(rule(rule_id), trace, geometry);
}

bool targeted_hit(const std::vector<Violation>& violations, const std::vector<dsl::OracleEntry>& oracle,
                  const RoadGeometry& geometry) {
  std::string fallback(dsl::kEgoId);
  for (const auto& v : geometry.vehicles) {
    if (v.id != dsl::kEgoId) {
      fallback = v.id;
      break;
    }
  }
  for (const auto& e : oracle) {
    const std::string actor = e.violating_actor.value_or(fallback);
    const bool hit = std::any_of(violations.begin(), violations.end(),
                                 [&](const Violation& v) { return v.rule_id == e.rule_id && v.actor_id == actor; });
    if (!hit) return false;
  }
  return !oracle.empty();
}

ViolationReport monitor(const Trace& trace, const std::vector<dsl::OracleEntry>& oracle,
                        const RoadGeometry& geometry) {
  ViolationReport report;
  report.scenario_id = trace.scenario_id;
  report.instance_seed = trace.instance_seed;
  check_geometry(trace, geometry);
  const Context c(trace, geometry);
  for (const auto& r : registry()) {
    auto v = evaluate(r, c);
    report.violations.insert(report.violations.end(), v.begin(), v.end());
  }
  report.collisions = sim::detect_collisions(trace, geometry);
  const bool any_v = !report.violations.empty();
  const bool any_c = !report.collisions.empty();
  report.outcome = any_v && any_c ? Outcome::both : any_v ? Outcome::rule_violation : any_c ? Outcome::collision
                                                                                           : Outcome::clean;
  report.targeted_hit = targeted_hit(report.violations, oracle, geometry);
  return report;
}

nlohmann::json to_json(const ViolationReport& report) {
  nlohmann::json j;
  j["scenario_id"] = report.scenario_id;
  j["instance_seed"] = report.instance_seed;
  j["outcome"] = outcome_name(report.outcome);
  j["targeted_hit"] = report.targeted_hit;
  j["violations"] = nlohmann::json::array();
  for (const auto& v : report.violations) {
    j["violations"].push_back({{"rule_id", v.rule_id},
                               {"actor_id", v.actor_id},
                               {"t_start", v.t_start},
                               {"t_end", v.t_end},
                               {"evidence", v.evidence}});
  }
  j["collisions"] = nlohmann::json::array();
  for (const auto& c : report.collisions) {
    j["collisions"].push_back({{"t", c.t}, {"actors", {c.actor_a, c.actor_b}}});
  }
  return j;
}

ViolationReport report_from_json(const nlohmann::json& j) {
  try {
    ViolationReport r;
    r.scenario_id = j.at("scenario_id").get<std::string>();
    r.instance_seed = j.at("instance_seed").get<std::uint64_t>();
    r.targeted_hit = j.at("targeted_hit").get<bool>();
    const auto outcome = j.at("outcome").get<std::string>();
    bool known = false;
    for (auto o : {Outcome::rule_violation, Outcome::collision, Outcome::both, Outcome::clean}) {
      if (outcome_name(o) == outcome) {
        r.outcome = o;
        known = true;
      }
    }
    if (!known) throw std::invalid_argument("unknown outcome " + outcome);
    for (const auto& v : j.at("violations")) {
      r.violations.push_back({v.at("rule_id").get<int>(), v.at("actor_id").get<std::string>(),
                              v.at("t_start").get<double>(), v.at("t_end").get<double>(),
                              v.at("evidence").get<std::map<std::string, double>>()});
    }
    for (const auto& c : j.at("collisions")) {
      r.collisions.push_back(
          {c.at("t").get<double>(), c.at("actors").at(0).get<std::string>(), c.at("actors").at(1).get<std::string>()});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed report: ") + e.what());
  }
}

std::string report_text(const ViolationReport& report) { return to_json(report).dump(2) + "\n"; }

GroupingConfig GroupingConfig::identity() {
  GroupingConfig g;
  for (const auto& r : registry()) g.groups[r.rule_id] = dsl::cvc_key(r.rule_id);
  return g;
}

GroupingConfig GroupingConfig::from_json(const nlohmann::json& j) {
  GroupingConfig g = identity();
  for (const auto& [group, members] : j.items()) {
    for (const auto& m : members) {
      const int id = m.get<int>();
      rule(id);
      g.groups[id] = group;
    }
  }
  return g;
}

std::string GroupingConfig::group_of(int rule_id) const {
  const auto it = groups.find(rule_id);
  return it != groups.end() ? it->second : dsl::cvc_key(rule_id);
}

std::map<std::string, int> grouped_counts(const ViolationReport& report, const GroupingConfig& config) {
  std::map<std::string, std::set<int>> hits;
  for (const auto& v : report.violations) hits[config.group_of(v.rule_id)].insert(v.rule_id);
  std::map<std::string, int> out;
  for (const auto& [group, rules] : hits) out[group] = static_cast<int>(rules.size());
  return out;
}

std::string summary_csv_header() {
  std::string h = "scenario_id,seed,outcome,targeted_hit";
  for (const auto& r : registry()) h += "," + dsl::cvc_key(r.rule_id);
  return h + "\n";
}

std::string summary_csv_row(const ViolationReport& report) {
  std::ostringstream o;
  o << csv_field(report.scenario_id) << ',' << report.instance_seed << ',' << outcome_name(report.outcome) << ','
    << (report.targeted_hit ? "true" : "false");
  for (const auto& r : registry()) {
    o << ',' << std::count_if(report.violations.begin(), report.violations.end(),
                              [&](const Violation& v) { return v.rule_id == r.rule_id; });
  }
  o << '\n';
  return o.str();
}

}  // namespace scenforge::monitor
