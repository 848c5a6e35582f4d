#include "scenforge/sim/obb.hpp"

#include <algorithm>
#include <cmath>

namespace scenforge::sim {

std::array<Vec2, 4> Obb::corners() const {
  const Vec2 f = unit_from_angle(heading) * (length / 2.0);
  const Vec2 l = left_normal(heading) * (width / 2.0);
  return {center + f + l, center + f - l, center - f - l, center - f + l};
}

bool Obb::contains(Vec2 p) const {
  const Vec2 rel = p - center;
  return std::abs(dot(rel, unit_from_angle(heading))) <= length / 2.0 &&
         std::abs(dot(rel, left_normal(heading))) <= width / 2.0;
}

bool overlaps(const Obb& a, const Obb& b) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  const std::array<Vec2, 4> axes{unit_from_angle(a.heading), left_normal(a.heading), unit_from_angle(b.heading),
                                 left_normal(b.heading)};
  for (const Vec2& axis : axes) {
    double amin = dot(ca[0], axis), amax = amin;
    double bmin = dot(cb[0], axis), bmax = bmin;
    for (int i = 1; i < 4; ++i) {
      const double pa = dot(ca[i], axis);
      const double pb = dot(cb[i], axis);
      amin = std::min(amin, pa);
      amax = std::max(amax, pa);
      bmin = std::min(bmin, pb);
      bmax = std::max(bmax, pb);
    }
    if (amax < bmin || bmax < amin) return false;
  }
  return true;
}

}  // namespace scenforge::sim
