#include "scenforge/sim/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace scenforge::sim {
namespace {

Vec2 segment_dir_at(const Path::Segment& seg, double u) {
  if (!seg.arc) return seg.dir;
  const double a = seg.start_angle + seg.turn * u / seg.radius;
  return seg.turn > 0 ? Vec2{-std::sin(a), std::cos(a)} : Vec2{std::sin(a), -std::cos(a)};
}

Vec2 segment_point_at(const Path::Segment& seg, double u) {
  if (!seg.arc) return seg.start + seg.dir * u;
  const double a = seg.start_angle + seg.turn * u / seg.radius;
  return seg.center + Vec2{std::cos(a), std::sin(a)} * seg.radius;
}

double dir_heading(Vec2 d) { return std::atan2(d.y, d.x); }

Projection project_line(Vec2 origin, Vec2 dir, double s0, double lo, double hi, Vec2 p) {
  const Vec2 rel = p - origin;
  double u = dot(rel, dir);
  u = std::clamp(u, lo, hi);
  const Vec2 foot = origin + dir * u;
  const Vec2 left{-dir.y, dir.x};
  return {s0 + u, dot(p - foot, left), distance(p, foot)};
}

}  // namespace

Path Path::line(Vec2 start, Vec2 dir, double length) {
  Path path;
  Segment seg;
  seg.start = start;
  seg.dir = dir * (1.0 / norm(dir));
  seg.length = length;
  path.segments_.push_back(seg);
  return path;
}

Path& Path::then_line(double length) {
  const Pose end = end_pose();
  Segment seg;
  seg.s0 = this->length();
  seg.start = end.p;
  seg.dir = segment_dir_at(segments_.back(), segments_.back().length);
  seg.length = length;
  segments_.push_back(seg);
  return *this;
}

Path& Path::then_arc(double radius, double sweep) {
  if (radius <= 0.0 || sweep == 0.0) throw std::invalid_argument("degenerate arc");
  const Vec2 p = end_pose().p;
  const Vec2 d = segment_dir_at(segments_.back(), segments_.back().length);
  Segment seg;
  seg.arc = true;
  seg.s0 = length();
  seg.turn = sweep > 0 ? 1 : -1;
  seg.radius = radius;
  seg.length = radius * std::abs(sweep);
  const Vec2 left{-d.y, d.x};
  seg.center = p + left * (seg.turn * radius);
  seg.start_angle = std::atan2(p.y - seg.center.y, p.x - seg.center.x);
  segments_.push_back(seg);
  return *this;
}

double Path::length() const {
  const auto& last = segments_.back();
  return last.s0 + last.length;
}

Pose Path::pose(double s) const {
  const auto& first = segments_.front();
  if (s <= 0.0) {
    const Vec2 d = segment_dir_at(first, 0.0);
    return {segment_point_at(first, 0.0) + d * s, dir_heading(d)};
  }
  for (const auto& seg : segments_) {
    if (s <= seg.s0 + seg.length) {
      const double u = s - seg.s0;
      return {segment_point_at(seg, u), dir_heading(segment_dir_at(seg, u))};
    }
  }
  const auto& last = segments_.back();
  const Vec2 d = segment_dir_at(last, last.length);
  return {segment_point_at(last, last.length) + d * (s - length()), dir_heading(d)};
}

Projection Path::project(Vec2 p) const {
  Projection best{0.0, 0.0, std::numeric_limits<double>::infinity()};
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& seg = segments_[i];
    const bool first = i == 0;
    const bool last = i + 1 == segments_.size();
    Projection cand;
    if (!seg.arc) {
      cand = project_line(seg.start, seg.dir, seg.s0, first ? -inf : 0.0, last ? inf : seg.length, p);
    } else {
      const Vec2 rel = p - seg.center;
      const double r = norm(rel);
      const double a = std::atan2(rel.y, rel.x);
      double delta = std::remainder(seg.turn * (a - seg.start_angle), 2.0 * std::numbers::pi);
      double u = delta * seg.radius;
      if (u >= 0.0 && u <= seg.length) {
        cand = {seg.s0 + u, seg.turn > 0 ? seg.radius - r : r - seg.radius, std::abs(r - seg.radius)};
      } else if (u < 0.0 && first) {
        cand = project_line(segment_point_at(seg, 0.0), segment_dir_at(seg, 0.0), seg.s0, -inf, 0.0, p);
      } else if (u > seg.length && last) {
        cand = project_line(segment_point_at(seg, seg.length), segment_dir_at(seg, seg.length), seg.s0 + seg.length,
                            0.0, inf, p);
      } else {
        // Nearest endpoint of the arc.
        const double ue = u < 0.0 ? 0.0 : seg.length;
        const Vec2 e = segment_point_at(seg, ue);
        const Vec2 d = segment_dir_at(seg, ue);
        const Vec2 left{-d.y, d.x};
        cand = {seg.s0 + ue, dot(p - e, left), distance(p, e)};
      }
    }
    if (cand.distance < best.distance) best = cand;
  }
  return best;
}

nlohmann::json Path::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& seg : segments_) {
    if (seg.arc) {
      out.push_back({{"kind", "arc"},
                     {"center", {seg.center.x, seg.center.y}},
                     {"radius", seg.radius},
                     {"start_angle", seg.start_angle},
                     {"turn", seg.turn},
                     {"length", seg.length}});
    } else {
      out.push_back({{"kind", "line"},
                     {"start", {seg.start.x, seg.start.y}},
                     {"dir", {seg.dir.x, seg.dir.y}},
                     {"length", seg.length}});
    }
  }
  return out;
}

}  // namespace scenforge::sim
