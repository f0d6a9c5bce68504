#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "box_oracle.hpp"
#include "dvca/geometry.hpp"

using namespace dvca;

using dvca::testing::sampled_distance;

TEST(Geometry, UnitSquaresTwoApart) {
  const OrientedBox a{{0, 0}, {0.5, 0.5}, 0.0};
  const OrientedBox b{{3, 0}, {0.5, 0.5}, 0.0};
  EXPECT_NEAR(min_obb_distance(a, b), 2.0, 1e-12);
}

TEST(Geometry, OverlapIsZero) {
  const OrientedBox a{{0, 0}, {2, 1}, 0.0};
  const OrientedBox b{{1, 0.5}, {1, 1}, 0.3};
  EXPECT_TRUE(boxes_overlap(a, b));
  EXPECT_EQ(min_obb_distance(a, b), 0.0);
}

TEST(Geometry, CornerToCornerClosedForm) {
  const OrientedBox a{{0, 0}, {1, 1}, 0.0};
  const OrientedBox b{{5, 6}, {1, 1}, 0.0};
  EXPECT_NEAR(min_obb_distance(a, b), std::hypot(3.0, 4.0), 1e-12);
}

TEST(Geometry, DiamondTipToFace) {
  // A unit square rotated 45 degrees reaches sqrt(2)/2 from its center.
  const OrientedBox a{{0, 0}, {0.5, 0.5}, std::numbers::pi / 4};
  const OrientedBox b{{3, 0}, {0.5, 0.5}, 0.0};
  EXPECT_NEAR(min_obb_distance(a, b), 2.5 - std::sqrt(0.5), 1e-12);
}

TEST(Geometry, RotatedNearCornerMatchesSampling) {
  const OrientedBox a{{0, 0}, {2, 1}, std::numbers::pi / 4};
  const OrientedBox b{{3.2, 1.9}, {1, 0.5}, 0.0};
  EXPECT_NEAR(min_obb_distance(a, b), sampled_distance(a, b), 1e-3);
}

TEST(Geometry, RandomPairsMatchSamplingOracle) {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> pos(-6.0, 6.0), half(0.1, 2.0), ang(-std::numbers::pi, std::numbers::pi);
  for (int i = 0; i < 100; ++i) {
    const OrientedBox a{{pos(rng), pos(rng)}, {half(rng), half(rng)}, ang(rng)};
    const OrientedBox b{{pos(rng), pos(rng)}, {half(rng), half(rng)}, ang(rng)};
    EXPECT_NEAR(min_obb_distance(a, b), sampled_distance(a, b), 1e-3) << "pair " << i;
  }
}

TEST(Geometry, SymmetricAndTranslationInvariant) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(-10.0, 10.0), half(0.2, 3.0), ang(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    OrientedBox a{{pos(rng), pos(rng)}, {half(rng), half(rng)}, ang(rng)};
    OrientedBox b{{pos(rng), pos(rng)}, {half(rng), half(rng)}, ang(rng)};
    const double d = min_obb_distance(a, b);
    EXPECT_NEAR(d, min_obb_distance(b, a), 1e-9);
    const Vec2 shift{pos(rng), pos(rng)};
    a.center += shift;
    b.center += shift;
    EXPECT_NEAR(d, min_obb_distance(a, b), 1e-9);
  }
}

TEST(Geometry, RotatedCornersMatchRotationMatrix) {
  const double h = std::numbers::pi / 4;
  const OrientedBox b{{10, 0}, {2, 1}, h};
  const auto k = b.corners();
  const Vec2 local[4] = {{2, 1}, {-2, 1}, {-2, -1}, {2, -1}};
  for (int i = 0; i < 4; ++i) {
    const Vec2 expect{10 + local[i].x * std::cos(h) - local[i].y * std::sin(h),
                      local[i].x * std::sin(h) + local[i].y * std::cos(h)};
    EXPECT_NEAR(k[i].x, expect.x, 1e-12);
    EXPECT_NEAR(k[i].y, expect.y, 1e-12);
  }
}

TEST(Geometry, WrapAngle) {
  EXPECT_NEAR(wrap_angle(3 * std::numbers::pi), -std::numbers::pi, 1e-12);
  EXPECT_NEAR(wrap_angle(-0.5), -0.5, 1e-15);
  EXPECT_NEAR(wrap_angle(2 * std::numbers::pi + 0.25), 0.25, 1e-12);
}

TEST(Geometry, PolylineProjectionAndExtrapolation) {
  const std::vector<Vec2> line{{0, 0}, {10, 0}, {10, 10}};
  const auto pr = project_onto_polyline(line, {5, 2});
  EXPECT_NEAR(pr.s, 5.0, 1e-12);
  EXPECT_NEAR(pr.lateral, 2.0, 1e-12);
  EXPECT_NEAR(polyline_length(line), 20.0, 1e-12);
  const auto end = polyline_at(line, 25.0);
  EXPECT_NEAR(end.p.x, 10.0, 1e-12);
  EXPECT_NEAR(end.p.y, 15.0, 1e-12);
  const auto before = polyline_at(line, -2.0);
  EXPECT_NEAR(before.p.x, -2.0, 1e-12);
}

TEST(Geometry, SegmentDistances) {
  EXPECT_NEAR(point_segment_distance({0, 1}, {-1, 0}, {1, 0}), 1.0, 1e-12);
  EXPECT_NEAR(point_segment_distance({3, 4}, {0, 0}, {0, 0}), 5.0, 1e-12);
  EXPECT_NEAR(segment_segment_distance({0, 0}, {1, 1}, {0, 1}, {1, 0}), 0.0, 1e-12);
  EXPECT_NEAR(segment_segment_distance({0, 0}, {1, 0}, {0, 2}, {1, 2}), 2.0, 1e-12);
}
