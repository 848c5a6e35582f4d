#pragma once

#include <array>

#include "scenforge/common/vec2.hpp"

namespace scenforge::sim {

/// Oriented rectangle: center, heading of the long axis, full extents.
struct Obb {
  Vec2 center;
  double heading = 0.0;
  double length = 4.5;
  double width = 2.0;

  std::array<Vec2, 4> corners() const;
  bool contains(Vec2 p) const;
};

/// Separating-axis test; touching rectangles count as overlapping.
bool overlaps(const Obb& a, const Obb& b);

}  // namespace scenforge::sim
