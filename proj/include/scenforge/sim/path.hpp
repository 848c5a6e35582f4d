#pragma once

#include <vector>

#include "json.hpp"
#include "scenforge/common/vec2.hpp"

namespace scenforge::sim {

struct Pose {
  Vec2 p;
  double heading = 0.0;
};

struct Projection {
  double s = 0.0;
  /// Signed distance to the left of the path direction.
  double offset = 0.0;
  double distance = 0.0;
};

/// Piecewise line/arc curve parametrized by arc length. Beyond either end
/// the path continues along its end tangents.
class Path {
 public:
  struct Segment {
    bool arc = false;
    double s0 = 0.0;
    double length = 0.0;
    // line
    Vec2 start;
    Vec2 dir;
    // arc
    Vec2 center;
    double radius = 0.0;
    double start_angle = 0.0;  // polar angle of the start point about center
    int turn = 1;              // +1 counterclockwise, -1 clockwise
  };

  static Path line(Vec2 start, Vec2 dir, double length);
  Path& then_line(double length);
  /// Signed sweep: positive turns left.
  Path& then_arc(double radius, double sweep);

  double length() const;
  Pose pose(double s) const;
  Projection project(Vec2 p) const;
  const std::vector<Segment>& segments() const { return segments_; }
  Pose end_pose() const { return pose(length()); }

  nlohmann::json to_json() const;

 private:
  std::vector<Segment> segments_;
};

}  // namespace scenforge::sim
