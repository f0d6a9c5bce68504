#pragma once

#include <array>
#include <cmath>
#include <span>

namespace dvca {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;

  double norm() const { return std::hypot(x, y); }
  constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
  constexpr double cross(Vec2 o) const { return x * o.y - y * o.x; }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline Vec2 unit_from_heading(double heading) {
  return {std::cos(heading), std::sin(heading)};
}

/// Left-hand normal of a heading (rotated +90 degrees).
inline Vec2 left_normal(double heading) {
  return {-std::sin(heading), std::cos(heading)};
}

double wrap_angle(double a);

struct OrientedBox {
  Vec2 center;
  Vec2 half_extents;  // (half length along heading, half width)
  double heading = 0.0;

  /// Corners in counter-clockwise order starting at front-left.
  std::array<Vec2, 4> corners() const;
  double area() const { return 4.0 * half_extents.x * half_extents.y; }
  bool contains(Vec2 p) const;
};

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);
double segment_segment_distance(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1);

/// Separating-axis overlap test (touching counts as overlap).
bool boxes_overlap(const OrientedBox& a, const OrientedBox& b);

/// Minimum Euclidean distance between two boxes; 0 when they overlap.
double min_obb_distance(const OrientedBox& a, const OrientedBox& b);

/// Distance from a point to a polyline plus the arc-length coordinate of the
/// closest point and the signed lateral offset (positive to the left).
struct PolylineProjection {
  double distance = 0.0;
  double s = 0.0;
  double lateral = 0.0;
  double heading = 0.0;
};
PolylineProjection project_onto_polyline(std::span<const Vec2> line, Vec2 p);

/// Point and heading at arc length s along a polyline; clamps beyond the ends
/// by extrapolating the first/last segment.
struct PolylinePoint {
  Vec2 p;
  double heading = 0.0;
};
PolylinePoint polyline_at(std::span<const Vec2> line, double s);
double polyline_length(std::span<const Vec2> line);

}  // namespace dvca
