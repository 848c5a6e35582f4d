#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scenforge::dsl {

// Closed vocabularies of the scenario DSL. Token spelling is normative: it is
// what documents contain and what serialization emits.

enum class Weather { sunny, cloudy, overcast, rainy, snowy, foggy, windy, not_mentioned };
enum class TimeOfDay { daytime, nighttime, not_mentioned };
enum class RoadType { straight, intersection, t_intersection, curve };
enum class RoadMarker { solid_line, broken_line, not_mentioned };
enum class TrafficSign { stop_sign, speed_limit_sign, traffic_light, not_mentioned };
enum class ActorType { car, truck };
enum class Behavior { go_forward, turn_left, turn_right, static_, stop };
enum class SpatialRelation { front, behind, left, right };
enum class HeadingRelation { same_direction, opposite_direction, from_left, from_right };

template <typename E>
struct TokenEntry {
  E value;
  std::string_view token;
};

template <typename E> std::span<const TokenEntry<E>> vocabulary();

/// Human-readable name of the vocabulary, e.g. "weather".
template <typename E> std::string_view vocabulary_name();

template <typename E>
std::string_view to_token(E value) {
  for (const auto& entry : vocabulary<E>()) {
    if (entry.value == value) return entry.token;
  }
  return "?";
}

template <typename E>
std::optional<E> from_token(std::string_view token) {
  for (const auto& entry : vocabulary<E>()) {
    if (entry.token == token) return entry.value;
  }
  return std::nullopt;
}

template <typename E>
std::vector<std::string> all_tokens() {
  std::vector<std::string> out;
  for (const auto& entry : vocabulary<E>()) out.emplace_back(entry.token);
  return out;
}

template <> std::span<const TokenEntry<Weather>> vocabulary<Weather>();
template <> std::span<const TokenEntry<TimeOfDay>> vocabulary<TimeOfDay>();
template <> std::span<const TokenEntry<RoadType>> vocabulary<RoadType>();
template <> std::span<const TokenEntry<RoadMarker>> vocabulary<RoadMarker>();
template <> std::span<const TokenEntry<TrafficSign>> vocabulary<TrafficSign>();
template <> std::span<const TokenEntry<ActorType>> vocabulary<ActorType>();
template <> std::span<const TokenEntry<Behavior>> vocabulary<Behavior>();
template <> std::span<const TokenEntry<SpatialRelation>> vocabulary<SpatialRelation>();
template <> std::span<const TokenEntry<HeadingRelation>> vocabulary<HeadingRelation>();

template <> std::string_view vocabulary_name<Weather>();
template <> std::string_view vocabulary_name<TimeOfDay>();
template <> std::string_view vocabulary_name<RoadType>();
template <> std::string_view vocabulary_name<RoadMarker>();
template <> std::string_view vocabulary_name<TrafficSign>();
template <> std::string_view vocabulary_name<ActorType>();
template <> std::string_view vocabulary_name<Behavior>();
template <> std::string_view vocabulary_name<SpatialRelation>();
template <> std::string_view vocabulary_name<HeadingRelation>();

/// Field kinds a free-text value can be canonicalized for. Shared with the
/// normalizer's synonym table.
enum class FieldKind { weather, time, behavior, heading, spatial, marker, sign, actor_type, road_type };

std::string_view field_kind_name(FieldKind kind);
std::optional<FieldKind> field_kind_from_name(std::string_view name);
/// Vocabulary tokens accepted for a field kind.
std::vector<std::string> field_kind_tokens(FieldKind kind);

}  // namespace scenforge::dsl
