#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "scenforge/dsl/spec.hpp"
#include "scenforge/normalizer/normalizer.hpp"

namespace scenforge::synth {

enum class Town { Town02, Town04, Town05 };
enum class Configuration { head_on, car_following, crossing_from_left, crossing_from_right, junction_conflict, ego_only };
/// Junction leg the adversary approaches from, relative to an ego that
/// enters from the south heading north.
enum class Approach { left, right, opposite };
enum class Unit { mps, m, s, degree };
enum class RangeKind { speed, init_dist };

std::string_view town_name(Town t);
std::string_view configuration_name(Configuration c);
std::string_view approach_name(Approach a);
std::string_view unit_name(Unit u);

struct ParamRange {
  std::string name;
  double low = 0.0;
  double high = 0.0;
  Unit unit = Unit::mps;

  bool operator==(const ParamRange&) const = default;
};

inline constexpr std::string_view kEgoInitDist = "EGO_INIT_DIST";
inline constexpr std::string_view kNpcInitDist = "NPC_INIT_DIST";
inline constexpr std::string_view kEgoSpeed = "ego_speed";
inline constexpr std::string_view kNpcSpeed = "npc_speed";
inline constexpr double kDefaultSpeedLimitMps = 13.89;
inline constexpr double kInitDistLow = 15.0;
inline constexpr double kInitDistHigh = 20.0;

enum class Role { ego, adversary, background };
std::string_view role_name(Role r);

struct ActorParams {
  std::string actor_id;
  Role role = Role::background;
  dsl::ActorType actor_type = dsl::ActorType::car;
  dsl::Behavior behavior = dsl::Behavior::go_forward;
  std::string model_id;
  double base_speed = 0.0;
  std::optional<dsl::PositionSpec> position;

  bool operator==(const ActorParams&) const = default;
};

struct TemplateParams {
  std::string scenario_id;
  Town town = Town::Town02;
  int time_hour = 12;
  std::string weather_preset;
  dsl::RoadType topology = dsl::RoadType::straight;
  Configuration configuration = Configuration::head_on;
  std::optional<Approach> approach;  // junction_conflict only
  /// Lanes per direction as realized by the town (straight/curve), or per
  /// approach at junctions.
  int lanes = 1;
  ParamRange ego_init_dist;
  ParamRange npc_init_dist;
  ParamRange ego_speed;
  ParamRange npc_speed;
  std::string ego_model;
  std::vector<std::string> npc_models;
  dsl::RoadMarker marker = dsl::RoadMarker::broken_line;
  std::vector<dsl::TrafficSign> signs;
  double speed_limit = kDefaultSpeedLimitMps;
  std::vector<dsl::OracleEntry> oracle;
  /// Ego first, then NPCs in document order.
  std::vector<ActorParams> actors;
  std::string adversary_id;  // empty for ego_only

  bool operator==(const TemplateParams&) const = default;
};

struct ScenarioTemplate {
  TemplateParams params;
  /// Sampled axes, sorted by name.
  std::vector<ParamRange> free_parameters;
  std::map<std::string, double> fixed_parameters;
  std::vector<std::string> warnings;

  bool operator==(const ScenarioTemplate&) const = default;
  const ParamRange& free(std::string_view name) const;
  const ActorParams& actor(std::string_view id) const;
};

struct ScenicProgram {
  std::string source_text;
  std::uint64_t content_digest = 0;
};

class CompatibilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MapSelection {
  Town town = Town::Town02;
  /// Set when the requested lane count had to be snapped to a supported one.
  std::optional<std::string> warning;
};

/// daytime -> 12, nighttime -> 22; not_mentioned is treated as daytime.
int map_time(dsl::TimeOfDay time);
std::string map_weather(dsl::Weather weather, dsl::TimeOfDay time);
/// `total_lanes` counts both directions on straight and curved roads.
MapSelection select_map(dsl::RoadType road_type, int total_lanes);
ParamRange widen_to_range(double base, RangeKind kind, std::string name = {});

ScenarioTemplate build_template(const normalizer::NormalizedSpec& normalized);
ScenicProgram render_scenic(const ScenarioTemplate& tmpl);

/// Digest of Scenic text excluding its content_digest header line.
std::uint64_t scenic_digest(std::string_view source_text);
/// name -> (low, high) for every `param <name> = VerifaiRange(low, high)`.
std::map<std::string, std::pair<double, double>> parse_verifai_ranges(std::string_view source_text);

nlohmann::json to_json(const ScenarioTemplate& tmpl);
ScenarioTemplate template_from_json(const nlohmann::json& j);
/// Canonical (sorted-key) JSON text of the template.
std::string template_text(const ScenarioTemplate& tmpl);
std::uint64_t template_digest(const ScenarioTemplate& tmpl);

}  // namespace scenforge::synth
