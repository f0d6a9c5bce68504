#include <gtest/gtest.h>

#include <random>

#include "dvca/errors.hpp"
#include "dvca/oracles.hpp"
#include "helpers.hpp"

using namespace dvca;

namespace {

std::vector<EgoState> cruise_log(double x0, double speed, SimTime t_end, double y = 0.0) {
  std::vector<EgoState> log;
  for (SimTime t = 0; t <= t_end; t += 10) log.push_back({{x0 + speed * to_seconds(t), y}, 0.0, speed, 0.0, t});
  return log;
}

PlanningOut straight_plan(SimTime t0, Vec2 p0, double speed) {
  PlanningOut plan;
  for (int k = 0; k <= 30; ++k) {
    const SimTime t = t0 + 100 * k;
    plan.trajectory.push_back({t, p0 + Vec2{speed * to_seconds(t - t0), 0.0}, speed, 0.0});
  }
  return plan;
}

Message planning_message(std::uint32_t seq, SimTime t, PlanningOut plan) {
  Message m;
  m.component = ComponentId::Planning;
  m.seq = seq;
  m.t_pub = t;
  m.payload = std::move(plan);
  return m;
}

}  // namespace

TEST(Oracles, NearMissBelowThreshold) {
  Scenario s = dvca::testing::straight_road();
  // Ego front edge at x=12; the obstacle starts 0.25 m ahead of it.
  s.objects.push_back(dvca::testing::static_object(1, {12.75, 0}, {1.0, 1.0, 1.0}));
  const std::vector<EgoState> log{{{10, 0}, 0.0, 0.0, 0.0, 0}};
  const auto hit = check_safe_distance(log, s, 0.3);
  ASSERT_TRUE(hit);
  EXPECT_NEAR(hit->distance, 0.25, 1e-12);
  EXPECT_EQ(hit->object_id, 1);
  EXPECT_FALSE(check_safe_distance(log, s, 0.25));
}

TEST(Oracles, RearApproachFlagged) {
  Scenario s = dvca::testing::straight_road();
  s.objects.push_back(dvca::testing::static_object(1, {5.9, 0}, {4.0, 2.0, 1.5}));
  const std::vector<EgoState> log{{{10, 0}, 0.0, 0.0, 0.0, 0}};
  const auto hit = check_safe_distance(log, s, 0.3);
  ASSERT_TRUE(hit);
  EXPECT_TRUE(hit->rear_approach);
}

TEST(Oracles, MissionWithinTolerance) {
  const std::vector<EgoState> log{{{208.1, 0}, 0.0, 0.0, 0.0, 0}};
  EXPECT_TRUE(check_mission(log, {210, 0}, 2.0));
  EXPECT_FALSE(check_mission(log, {210, 0}, 1.8));
  EXPECT_FALSE(check_mission({}, {210, 0}, 2.0));
}

TEST(Oracles, SpeedingTolerance) {
  const Scenario s = dvca::testing::straight_road();
  EXPECT_FALSE(check_speeding(cruise_log(10, 11.4, 1000), s.map, 0.5));
  const auto hit = check_speeding(cruise_log(10, 11.6, 1000), s.map, 0.5);
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->t, 0);
  EXPECT_EQ(hit->limit, 11.0);
}

TEST(Oracles, SpeedingIgnoredOffMap) {
  const Scenario s = dvca::testing::straight_road();
  EXPECT_FALSE(check_speeding(cruise_log(10, 20.0, 1000, 10.0), s.map, 0.5));
}

TEST(Oracles, CompoundViolationsSortedByTime) {
  Scenario s = dvca::testing::straight_road();
  std::vector<EgoState> log = cruise_log(10, 5.0, 2000);
  log[50].speed = 12.0;  // t = 500
  s.objects.push_back(dvca::testing::static_object(1, {log[150].p.x + 2.1, 0}, {0.1, 0.1, 1.0}));
  const Verdict v = evaluate(log, s, OracleConfig{});
  ASSERT_FALSE(v.passed);
  ASSERT_EQ(v.violations.size(), 3u);
  EXPECT_EQ(v.violations[0].kind, ViolationKind::Speeding);
  EXPECT_EQ(v.violations[0].t, 500);
  EXPECT_EQ(v.violations[1].kind, ViolationKind::SafeDistance);
  EXPECT_EQ(v.violations[2].kind, ViolationKind::Mission);
  EXPECT_EQ(v.violations[2].t, 2000);
  for (std::size_t i = 1; i < v.violations.size(); ++i) EXPECT_LE(v.violations[i - 1].t, v.violations[i].t);
}

TEST(Oracles, DisabledKindsAreSkipped) {
  const Scenario s = dvca::testing::straight_road();
  OracleConfig cfg;
  cfg.enabled = {ViolationKind::Speeding};
  EXPECT_TRUE(evaluate(cruise_log(10, 5.0, 1000), s, cfg).passed);
}

TEST(Oracles, SafeDistanceMonotoneInThreshold) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> gap(0.0, 1.5);
  for (int i = 0; i < 50; ++i) {
    Scenario s = dvca::testing::straight_road();
    s.objects.push_back(dvca::testing::static_object(1, {12.5 + gap(rng), 0.7}, {1.0, 1.0, 1.0}));
    const std::vector<EgoState> log{{{10, 0}, 0.0, 0.0, 0.0, 0}};
    bool seen = false;
    for (double c = 0.0; c <= 2.0; c += 0.05) {
      const bool hit = check_safe_distance(log, s, c).has_value();
      if (seen) EXPECT_TRUE(hit) << "c=" << c;
      seen = seen || hit;
    }
  }
}

TEST(Oracles, ConfigJson) {
  const auto cfg = oracle_config_from_json(nlohmann::json::parse(R"({"safe_distance": 0.5, "enabled": ["Mission"]})"));
  EXPECT_EQ(cfg.safe_distance, 0.5);
  EXPECT_EQ(cfg.enabled.size(), 1u);
  EXPECT_EQ(cfg.dest_tolerance, 2.0);
  const auto back = oracle_config_from_json(nlohmann::json::parse(oracle_config_to_json(cfg).dump()));
  EXPECT_EQ(oracle_config_to_json(back).dump(), oracle_config_to_json(cfg).dump());
  EXPECT_THROW(oracle_config_from_json(nlohmann::json::parse(R"({"bogus": 1})")), Error);
}

TEST(Oracles, PlanningCleanCruise) {
  const Scenario s = dvca::testing::straight_road();
  const std::vector<Message> row{planning_message(1, 1000, straight_plan(1000, {20, 0}, 8.0))};
  PlanningCheckContext ctx{&s, OracleConfig{}, {{20, 0}, 0.0, 8.0, 0.0, 1000}, row};
  EXPECT_FALSE(planning_message_violates(0, ctx));
}

TEST(Oracles, PlanningThroughObstacle) {
  Scenario s = dvca::testing::straight_road();
  s.objects.push_back(dvca::testing::static_object(1, {40, 0}, {1.0, 1.0, 1.0}));
  const std::vector<Message> row{planning_message(1, 1000, straight_plan(1000, {20, 0}, 8.0))};
  PlanningCheckContext ctx{&s, OracleConfig{}, {{20, 0}, 0.0, 8.0, 0.0, 1000}, row};
  EXPECT_TRUE(planning_message_violates(0, ctx));
}

TEST(Oracles, PlanningMovingObjectExtrapolated) {
  Scenario s = dvca::testing::straight_road();
  // Crosses the ego path 2 s after publish, where the plan puts the ego.
  s.objects.push_back(dvca::testing::moving_object(1, {36, -4}, {0, 2}, 60000, {1, 1, 1}, ObjectKind::Pedestrian));
  const std::vector<Message> row{planning_message(1, 0, straight_plan(0, {20, 0}, 8.0))};
  PlanningCheckContext ctx{&s, OracleConfig{}, {{20, 0}, 0.0, 8.0, 0.0, 0}, row};
  EXPECT_TRUE(planning_message_violates(0, ctx));
}

TEST(Oracles, PlanningSpeedAboveLimit) {
  const Scenario s = dvca::testing::straight_road();
  const std::vector<Message> row{planning_message(1, 1000, straight_plan(1000, {20, 0}, 12.0))};
  PlanningCheckContext ctx{&s, OracleConfig{}, {{20, 0}, 0.0, 12.0, 0.0, 1000}, row};
  EXPECT_TRUE(planning_message_violates(0, ctx));
}

TEST(Oracles, PlanningStall) {
  const Scenario s = dvca::testing::straight_road();
  std::vector<Message> row;
  for (std::uint32_t k = 0; k <= 40; ++k) row.push_back(planning_message(k + 1, 1000 + 100 * k, PlanningOut{}));
  PlanningCheckContext ctx{&s, OracleConfig{}, {{20, 0}, 0.0, 0.0, 0.0, 0}, row};
  EXPECT_FALSE(planning_message_violates(10, ctx));
  EXPECT_FALSE(planning_message_violates(29, ctx));
  EXPECT_TRUE(planning_message_violates(30, ctx));
}

TEST(Oracles, PlanningStallJustifiedByBlocker) {
  Scenario s = dvca::testing::straight_road();
  s.objects.push_back(dvca::testing::static_object(1, {30, 0}, {2.0, 3.4, 1.0}));
  std::vector<Message> row;
  for (std::uint32_t k = 0; k <= 40; ++k) row.push_back(planning_message(k + 1, 1000 + 100 * k, PlanningOut{}));
  PlanningCheckContext ctx{&s, OracleConfig{}, {{20, 0}, 0.0, 0.0, 0.0, 0}, row};
  EXPECT_FALSE(planning_message_violates(40, ctx));
}

TEST(Oracles, HeldPlans) {
  EXPECT_TRUE(is_held(PlanningOut{}));
  EXPECT_FALSE(is_held(straight_plan(0, {0, 0}, 5.0)));
  EXPECT_TRUE(is_held(straight_plan(0, {0, 0}, 0.0)));
}
