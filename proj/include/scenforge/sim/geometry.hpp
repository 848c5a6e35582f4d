#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "scenforge/sim/path.hpp"
#include "scenforge/synth/junction.hpp"
#include "scenforge/synth/synth.hpp"

namespace scenforge::sim {

inline constexpr double kLaneWidth = 3.5;
inline constexpr double kStraightLength = 300.0;
inline constexpr double kLegLength = 150.0;
inline constexpr double kCurveLead = 100.0;
inline constexpr double kCurveRadius = 80.0;
inline constexpr double kCurveSweepDeg = 60.0;
/// Stop lines sit this far before the conflict region.
inline constexpr double kStopLineSetback = 1.0;

enum class SignalState { green, yellow, red };
std::string_view signal_state_name(SignalState s);

struct SignalSchedule {
  double cycle_s = 30.0;
  double green_s = 12.0;
  double yellow_s = 3.0;
  double offset_s = 0.0;

  SignalState state(double t) const;
};

enum class Control { none, signal, stop, yield };
std::string_view control_name(Control c);

/// A two-way road. Lanes with direction +1 run along the path on its right
/// side (negative offsets); direction -1 lanes run against it on the left.
struct Road {
  std::string id;
  Path path;
  std::optional<synth::Leg> leg;  // junction legs run outward from the region
};

struct Lane {
  std::string id;  // "<road>/<+|->/<index>", index 0 next to the centerline
  int road = 0;
  int direction = 1;
  int index = 0;
  double offset = 0.0;
  dsl::RoadMarker marker = dsl::RoadMarker::broken_line;
};

struct Approach {
  synth::Leg leg = synth::Leg::south;
  std::string name;  // "south", "east", "north", "west"
  Control control = Control::none;
  Vec2 stop_line_a;
  Vec2 stop_line_b;
  std::optional<SignalSchedule> signal;
};

struct VehicleInfo {
  std::string id;
  dsl::ActorType actor_type = dsl::ActorType::car;
  double length = 4.5;
  double width = 2.0;
};

struct LaneRef {
  std::string lane;  // lane id, "junction" inside the region, "offroad" elsewhere
  /// Offset from the lane centerline, positive toward the road path's left.
  double lat = 0.0;
  int road = -1;
  int lane_index = -1;
  double s = 0.0;       // station on the road path
  double offset = 0.0;  // offset from the road centerline
  bool in_region = false;
};

struct RoadGeometry {
  synth::Town town = synth::Town::Town02;
  dsl::RoadType topology = dsl::RoadType::straight;
  int lanes_per_direction = 1;
  dsl::RoadMarker marker = dsl::RoadMarker::broken_line;
  std::vector<Road> roads;
  std::vector<Lane> lanes;
  std::vector<Approach> approaches;
  /// Half width of the square conflict region; zero for non-junction roads.
  double region_half = 0.0;
  std::vector<Vec2> conflict_region;
  double speed_limit = synth::kDefaultSpeedLimitMps;
  /// Station of the designed conflict point on the main road (non-junction).
  double conflict_station = 0.0;
  std::vector<VehicleInfo> vehicles;

  bool is_junction() const { return region_half > 0.0; }
  bool in_region(Vec2 p) const;
  LaneRef locate(Vec2 p) const;
  const Approach* approach(synth::Leg leg) const;
  const VehicleInfo& vehicle(std::string_view id) const;
  /// Leg whose road contains p, for points outside the region.
  std::optional<synth::Leg> leg_of(Vec2 p) const;
  nlohmann::json to_json() const;
  std::uint64_t digest() const;
};

VehicleInfo footprint_for(const std::string& id, dsl::ActorType type);
RoadGeometry build_geometry(const synth::ScenarioTemplate& tmpl);

/// Unit outward direction of a junction leg.
Vec2 leg_direction(synth::Leg leg);
std::string_view leg_name(synth::Leg leg);

}  // namespace scenforge::sim
