#include "dvca/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace dvca {

double wrap_angle(double a) {
  a = std::fmod(a + std::numbers::pi, 2.0 * std::numbers::pi);
  if (a < 0) a += 2.0 * std::numbers::pi;
  return a - std::numbers::pi;
}

std::array<Vec2, 4> OrientedBox::corners() const {
  const Vec2 u = unit_from_heading(heading) * half_extents.x;
  const Vec2 n = left_normal(heading) * half_extents.y;
  return {center + u + n, center - u + n, center - u - n, center + u - n};
}

bool OrientedBox::contains(Vec2 p) const {
  const Vec2 d = p - center;
  const double lon = d.dot(unit_from_heading(heading));
  const double lat = d.dot(left_normal(heading));
  return std::abs(lon) <= half_extents.x && std::abs(lat) <= half_extents.y;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = ab.dot(ab);
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + ab * t)).norm();
}

namespace {

int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double v = (b - a).cross(c - a);
  if (v > 0) return 1;
  if (v < 0) return -1;
  return 0;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

bool segments_intersect(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) {
  const int o1 = orientation(a0, a1, b0);
  const int o2 = orientation(a0, a1, b1);
  const int o3 = orientation(b0, b1, a0);
  const int o4 = orientation(b0, b1, a1);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a0, a1, b0)) return true;
  if (o2 == 0 && on_segment(a0, a1, b1)) return true;
  if (o3 == 0 && on_segment(b0, b1, a0)) return true;
  if (o4 == 0 && on_segment(b0, b1, a1)) return true;
  return false;
}

// Projection interval of a box onto an axis.
std::pair<double, double> project(const OrientedBox& box, Vec2 axis) {
  const double c = box.center.dot(axis);
  const double r = box.half_extents.x * std::abs(unit_from_heading(box.heading).dot(axis)) +
                   box.half_extents.y * std::abs(left_normal(box.heading).dot(axis));
  return {c - r, c + r};
}

}  // namespace

double segment_segment_distance(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) {
  if (segments_intersect(a0, a1, b0, b1)) return 0.0;
  return std::min({point_segment_distance(a0, b0, b1), point_segment_distance(a1, b0, b1),
                   point_segment_distance(b0, a0, a1), point_segment_distance(b1, a0, a1)});
}

bool boxes_overlap(const OrientedBox& a, const OrientedBox& b) {
  const std::array<Vec2, 4> axes = {unit_from_heading(a.heading), left_normal(a.heading),
                                    unit_from_heading(b.heading), left_normal(b.heading)};
  for (const Vec2& axis : axes) {
    const auto [a_lo, a_hi] = project(a, axis);
    const auto [b_lo, b_hi] = project(b, axis);
    if (a_hi < b_lo || b_hi < a_lo) return false;
  }
  return true;
}

double min_obb_distance(const OrientedBox& a, const OrientedBox& b) {
  if (boxes_overlap(a, b)) return 0.0;
  const auto ca = a.corners();
  const auto cb = b.corners();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      best = std::min(best, segment_segment_distance(ca[i], ca[(i + 1) % 4], cb[j], cb[(j + 1) % 4]));
    }
  }
  return best;
}

double polyline_length(std::span<const Vec2> line) {
  double len = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i) len += (line[i] - line[i - 1]).norm();
  return len;
}

PolylineProjection project_onto_polyline(std::span<const Vec2> line, Vec2 p) {
  PolylineProjection best;
  best.distance = std::numeric_limits<double>::infinity();
  double s_acc = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i) {
    const Vec2 a = line[i - 1];
    const Vec2 ab = line[i] - a;
    const double len = ab.norm();
    if (len == 0.0) continue;
    const Vec2 u = ab / len;
    const double t = std::clamp((p - a).dot(u), 0.0, len);
    const Vec2 q = a + u * t;
    const double d = (p - q).norm();
    if (d < best.distance) {
      best.distance = d;
      best.s = s_acc + t;
      best.lateral = u.cross(p - a);
      best.heading = std::atan2(u.y, u.x);
    }
    s_acc += len;
  }
  return best;
}

PolylinePoint polyline_at(std::span<const Vec2> line, double s) {
  if (line.empty()) return {};
  double s_acc = 0.0;
  bool first = true;
  std::size_t last_seg = 0;  // end index of the last non-degenerate segment
  double last_start = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i) {
    const Vec2 ab = line[i] - line[i - 1];
    const double len = ab.norm();
    if (len == 0.0) continue;
    const Vec2 u = ab / len;
    // Before the start the first segment is extrapolated backwards.
    if (s <= s_acc + len || (first && s < 0)) {
      return {line[i - 1] + u * (s - s_acc), std::atan2(u.y, u.x)};
    }
    first = false;
    last_seg = i;
    last_start = s_acc;
    s_acc += len;
  }
  if (last_seg == 0) return {line.front(), 0.0};
  const Vec2 ab = line[last_seg] - line[last_seg - 1];
  const Vec2 u = ab / ab.norm();
  return {line[last_seg - 1] + u * (s - last_start), std::atan2(u.y, u.x)};
}

}  // namespace dvca
