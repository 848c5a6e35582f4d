#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scenforge/dsl/vocab.hpp"

namespace scenforge::dsl {

struct Environment {
  Weather weather = Weather::not_mentioned;
  TimeOfDay time_of_day = TimeOfDay::not_mentioned;
  /// Explicit clock hour when the source gave one ("12 pm"); wins over the
  /// daytime/nighttime mapping downstream.
  std::optional<int> time_hour;

  bool operator==(const Environment&) const = default;
};

struct RoadNetwork {
  RoadType road_type = RoadType::straight;
  int number_of_ways = 2;
  /// Per direction on straight/curve roads, per approach at junctions.
  int number_of_lanes = 1;
  RoadMarker road_markers = RoadMarker::not_mentioned;
  std::vector<TrafficSign> traffic_signs;
  /// m/s; present only together with speed_limit_sign.
  std::optional<double> speed_limit_value;

  bool has_sign(TrafficSign sign) const;
  bool operator==(const RoadNetwork&) const = default;
};

struct PositionSpec {
  std::string reference = "ego";
  SpatialRelation spatial_relation = SpatialRelation::front;
  std::optional<HeadingRelation> heading_relation;

  bool operator==(const PositionSpec&) const = default;
};

struct ActorSpec {
  std::string actor_id;
  ActorType actor_type = ActorType::car;
  Behavior behavior = Behavior::go_forward;
  std::optional<double> speed_mps;
  std::optional<PositionSpec> position;  // required for NPCs, absent for ego
  std::optional<std::string> model_id;

  bool operator==(const ActorSpec&) const = default;
};

struct ActorSet {
  ActorSpec ego;
  std::vector<ActorSpec> npcs;

  const ActorSpec* find(std::string_view actor_id) const;
  bool operator==(const ActorSet&) const = default;
};

struct OracleEntry {
  int rule_id = 0;  // CVC section number
  std::string violation_type;
  std::string description;
  std::optional<std::string> violating_actor;

  bool operator==(const OracleEntry&) const = default;
};

struct ScenarioSpec {
  std::string scenario_id;
  Environment environment;
  RoadNetwork road_network;
  ActorSet actors;
  std::vector<OracleEntry> oracle;

  bool operator==(const ScenarioSpec&) const = default;
};

inline constexpr std::string_view kEgoId = "ego";
inline constexpr int kMaxNpcs = 4;
inline constexpr int kMaxLanes = 8;
inline constexpr double kMaxSpeedMps = 45.0;

/// The actor an oracle entry attributes its violation to: the explicit
/// violating_actor, else the first NPC, else the ego.
std::string effective_violating_actor(const ScenarioSpec& spec, const OracleEntry& entry);

/// CVC sections the rule monitor can evaluate, ascending.
std::span<const int> supported_rule_ids();
bool is_supported_rule(int rule_id);

enum class IssueKind { missing_section, invalid_enum, range_violation, inconsistent, unknown_field };

std::string_view issue_kind_name(IssueKind kind);

struct ValidationIssue {
  std::string path;
  IssueKind kind = IssueKind::inconsistent;
  std::string message;
  std::vector<std::string> allowed;  // non-empty for invalid_enum

  bool operator==(const ValidationIssue&) const = default;
};

/// Stable sort by path, the canonical issue order.
void sort_issues(std::vector<ValidationIssue>& issues);

}  // namespace scenforge::dsl
