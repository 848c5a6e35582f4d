#include "scenforge/dsl/vocab.hpp"

namespace scenforge::dsl {
namespace {

constexpr std::array<TokenEntry<Weather>, 8> kWeather{{
    {Weather::sunny, "sunny"},
    {Weather::cloudy, "cloudy"},
    {Weather::overcast, "overcast"},
    {Weather::rainy, "rainy"},
    {Weather::snowy, "snowy"},
    {Weather::foggy, "foggy"},
    {Weather::windy, "windy"},
    {Weather::not_mentioned, "not_mentioned"},
}};

constexpr std::array<TokenEntry<TimeOfDay>, 3> kTime{{
    {TimeOfDay::daytime, "daytime"},
    {TimeOfDay::nighttime, "nighttime"},
    {TimeOfDay::not_mentioned, "not_mentioned"},
}};

constexpr std::array<TokenEntry<RoadType>, 4> kRoadType{{
    {RoadType::straight, "straight"},
    {RoadType::intersection, "intersection"},
    {RoadType::t_intersection, "t_intersection"},
    {RoadType::curve, "curve"},
}};

constexpr std::array<TokenEntry<RoadMarker>, 3> kMarker{{
    {RoadMarker::solid_line, "solid_line"},
    {RoadMarker::broken_line, "broken_line"},
    {RoadMarker::not_mentioned, "not_mentioned"},
}};

constexpr std::array<TokenEntry<TrafficSign>, 4> kSign{{
    {TrafficSign::stop_sign, "stop_sign"},
    {TrafficSign::speed_limit_sign, "speed_limit_sign"},
    {TrafficSign::traffic_light, "traffic_light"},
    {TrafficSign::not_mentioned, "not_mentioned"},
}};

constexpr std::array<TokenEntry<ActorType>, 2> kActorType{{
    {ActorType::car, "car"},
    {ActorType::truck, "truck"},
}};

constexpr std::array<TokenEntry<Behavior>, 5> kBehavior{{
    {Behavior::go_forward, "go_forward"},
    {Behavior::turn_left, "turn_left"},
    {Behavior::turn_right, "turn_right"},
    {Behavior::static_, "static"},
    {Behavior::stop, "stop"},
}};

constexpr std::array<TokenEntry<SpatialRelation>, 4> kSpatial{{
    {SpatialRelation::front, "front"},
    {SpatialRelation::behind, "behind"},
    {SpatialRelation::left, "left"},
    {SpatialRelation::right, "right"},
}};

constexpr std::array<TokenEntry<HeadingRelation>, 4> kHeading{{
    {HeadingRelation::same_direction, "same_direction"},
    {HeadingRelation::opposite_direction, "opposite_direction"},
    {HeadingRelation::from_left, "from_left"},
    {HeadingRelation::from_right, "from_right"},
}};

constexpr std::array<std::pair<FieldKind, std::string_view>, 9> kFieldKinds{{
    {FieldKind::weather, "weather"},
    {FieldKind::time, "time"},
    {FieldKind::behavior, "behavior"},
    {FieldKind::heading, "heading"},
    {FieldKind::spatial, "spatial"},
    {FieldKind::marker, "marker"},
    {FieldKind::sign, "sign"},
    {FieldKind::actor_type, "actor_type"},
    {FieldKind::road_type, "road_type"},
}};

}  // namespace

template <> std::span<const TokenEntry<Weather>> vocabulary<Weather>() { return kWeather; }
template <> std::span<const TokenEntry<TimeOfDay>> vocabulary<TimeOfDay>() { return kTime; }
template <> std::span<const TokenEntry<RoadType>> vocabulary<RoadType>() { return kRoadType; }
template <> std::span<const TokenEntry<RoadMarker>> vocabulary<RoadMarker>() { return kMarker; }
template <> std::span<const TokenEntry<TrafficSign>> vocabulary<TrafficSign>() { return kSign; }
template <> std::span<const TokenEntry<ActorType>> vocabulary<ActorType>() { return kActorType; }
template <> std::span<const TokenEntry<Behavior>> vocabulary<Behavior>() { return kBehavior; }
template <> std::span<const TokenEntry<SpatialRelation>> vocabulary<SpatialRelation>() { return kSpatial; }
template <> std::span<const TokenEntry<HeadingRelation>> vocabulary<HeadingRelation>() { return kHeading; }

template <> std::string_view vocabulary_name<Weather>() { return "weather"; }
template <> std::string_view vocabulary_name<TimeOfDay>() { return "time_of_day"; }
template <> std::string_view vocabulary_name<RoadType>() { return "road_type"; }
template <> std::string_view vocabulary_name<RoadMarker>() { return "road_markers"; }
template <> std::string_view vocabulary_name<TrafficSign>() { return "traffic_signs"; }
template <> std::string_view vocabulary_name<ActorType>() { return "actor_type"; }
template <> std::string_view vocabulary_name<Behavior>() { return "behavior"; }
template <> std::string_view vocabulary_name<SpatialRelation>() { return "spatial_relation"; }
template <> std::string_view vocabulary_name<HeadingRelation>() { return "heading_relation"; }

std::string_view field_kind_name(FieldKind kind) {
  for (const auto& [k, name] : kFieldKinds) {
    if (k == kind) return name;
  }
  return "?";
}

std::optional<FieldKind> field_kind_from_name(std::string_view name) {
  for (const auto& [k, n] : kFieldKinds) {
    if (n == name) return k;
  }
  return std::nullopt;
}

std::vector<std::string> field_kind_tokens(FieldKind kind) {
  switch (kind) {
    case FieldKind::weather: return all_tokens<Weather>();
    case FieldKind::time: return all_tokens<TimeOfDay>();
    case FieldKind::behavior: return all_tokens<Behavior>();
    case FieldKind::heading: return all_tokens<HeadingRelation>();
    case FieldKind::spatial: return all_tokens<SpatialRelation>();
    case FieldKind::marker: return all_tokens<RoadMarker>();
    case FieldKind::sign: return all_tokens<TrafficSign>();
    case FieldKind::actor_type: return all_tokens<ActorType>();
    case FieldKind::road_type: return all_tokens<RoadType>();
  }
  return {};
}

}  // namespace scenforge::dsl
