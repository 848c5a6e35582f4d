#pragma once

#include <array>

#include "scenforge/synth/synth.hpp"

namespace scenforge::synth {

/// Junction legs, counterclockwise from the ego's entry leg. The ego enters
/// from the south heading north.
enum class Leg { south = 0, east = 1, north = 2, west = 3 };

inline Leg leg_offset(Leg leg, int quarters) { return static_cast<Leg>(((static_cast<int>(leg) + quarters) % 4 + 4) % 4); }

struct JunctionLayout {
  std::array<bool, 4> present{true, true, true, true};
  bool t_junction = false;
  Leg stem = Leg::west;  // meaningful for T junctions only

  bool has(Leg leg) const { return present[static_cast<int>(leg)]; }
};

inline JunctionLayout junction_layout(const TemplateParams& p) {
  JunctionLayout layout;
  if (p.topology != dsl::RoadType::t_intersection) return layout;
  layout.t_junction = true;
  if (p.approach == Approach::right) {
    layout.stem = Leg::east;
  } else if (p.approach == Approach::left) {
    layout.stem = Leg::west;
  } else {
    const bool ego_right = !p.actors.empty() && p.actors.front().behavior == dsl::Behavior::turn_right;
    layout.stem = ego_right ? Leg::east : Leg::west;
  }
  layout.present[static_cast<int>(layout.stem == Leg::west ? Leg::east : Leg::west)] = false;
  return layout;
}

inline Leg heading_leg(dsl::HeadingRelation h) {
  switch (h) {
    case dsl::HeadingRelation::same_direction: return Leg::south;
    case dsl::HeadingRelation::opposite_direction: return Leg::north;
    case dsl::HeadingRelation::from_left: return Leg::west;
    case dsl::HeadingRelation::from_right: return Leg::east;
  }
  return Leg::south;
}

inline Leg actor_entry_leg(const TemplateParams&, const ActorParams& a) {
  if (a.role == Role::ego || !a.position || !a.position->heading_relation) return Leg::south;
  return heading_leg(*a.position->heading_relation);
}

/// Leg a vehicle leaves through; stationary behaviors keep their entry leg.
inline Leg exit_leg(Leg entry, dsl::Behavior behavior) {
  switch (behavior) {
    case dsl::Behavior::go_forward: return leg_offset(entry, 2);
    case dsl::Behavior::turn_left: return leg_offset(entry, 3);
    case dsl::Behavior::turn_right: return leg_offset(entry, 1);
    default: return entry;
  }
}

}  // namespace scenforge::synth
