#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dvca/world.hpp"
#include "helpers.hpp"

using namespace dvca;

TEST(World, StraightAtTenMetersPerSecond) {
  EgoState s{{0, 0}, 0.0, 10.0, 0.0, 0};
  for (int i = 0; i < 100; ++i) s = step_ego(s, {}, 1);
  EXPECT_NEAR(s.p.x, 1.0, 1e-9);
  EXPECT_NEAR(s.p.y, 0.0, 1e-12);
  EXPECT_EQ(s.t, 100);
}

TEST(World, SpeedClampsAtZero) {
  EgoState s{{0, 0}, 0.0, 0.5, 0.0, 0};
  for (int i = 0; i < 1000; ++i) s = step_ego(s, {-8.0, 0.0}, 1);
  EXPECT_EQ(s.speed, 0.0);
  const double x = s.p.x;
  s = step_ego(s, {-8.0, 0.0}, 1);
  EXPECT_EQ(s.p.x, x);
}

TEST(World, CommandsAreClamped) {
  EgoState s{{0, 0}, 0.0, 0.0, 0.0, 0};
  s = step_ego(s, {100.0, 0.0}, 1000);
  EXPECT_NEAR(s.speed, VehicleLimits{}.max_accel, 1e-12);
}

TEST(World, ConstantSteerClosesCircle) {
  const VehicleLimits lim;
  const double steer = 0.2;
  const double v = 5.0;
  const double radius = lim.wheelbase / std::tan(steer);
  const auto period = static_cast<SimTime>(std::llround(2 * std::numbers::pi * radius / v * 1000.0));
  EgoState s{{3, 4}, 0.7, v, 0.0, 0};
  for (SimTime t = 0; t < period; ++t) s = step_ego(s, {0.0, steer}, 1, lim);
  EXPECT_NEAR(s.p.x, 3.0, 0.01);
  EXPECT_NEAR(s.p.y, 4.0, 0.01);
}

TEST(World, GroundTruthRangeFilter) {
  Scenario s = dvca::testing::straight_road();
  s.objects.push_back(dvca::testing::static_object(1, {30, 3}, {1, 1, 1}));
  s.objects.push_back(dvca::testing::static_object(2, {200, 3}, {1, 1, 1}));
  EXPECT_EQ(ground_truth_objects(s, 0, {10, 0}).size(), 2u);
  const auto near = ground_truth_objects(s, 0, {10, 0}, 60.0);
  ASSERT_EQ(near.size(), 1u);
  EXPECT_EQ(near[0].id, 1);
}
