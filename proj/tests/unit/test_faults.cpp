#include <gtest/gtest.h>

#include "dvca/errors.hpp"
#include "dvca/faults.hpp"
#include "helpers.hpp"

using namespace dvca;

TEST(Faults, TriggerWindowIsHalfOpen) {
  FaultTrigger tr;
  tr.t0 = 1000;
  tr.t1 = 2000;
  EXPECT_FALSE(tr.active(999, {}));
  EXPECT_TRUE(tr.active(1000, {}));
  EXPECT_TRUE(tr.active(1999, {}));
  EXPECT_FALSE(tr.active(2000, {}));
}

TEST(Faults, TriggerRegion) {
  FaultTrigger tr;
  tr.region = Region{{50, 0}, 5.0};
  EXPECT_TRUE(tr.active(0, {52, 1}));
  EXPECT_FALSE(tr.active(0, {60, 0}));
}

TEST(Faults, ObjectFilter) {
  FaultTrigger tr;
  EXPECT_TRUE(tr.matches_object(7));
  tr.object_id = 3;
  EXPECT_TRUE(tr.matches_object(3));
  EXPECT_FALSE(tr.matches_object(7));
}

TEST(Faults, TargetsFollowKinds) {
  EXPECT_EQ(target_of(FaultKind::MissDetection), ComponentId::Perception);
  EXPECT_EQ(target_of(FaultKind::WrongPredictionTrajectory), ComponentId::Prediction);
  EXPECT_EQ(target_of(FaultKind::NoPlanningTrajectory), ComponentId::Planning);
  EXPECT_EQ(target_of(FaultKind::WrongLateralCommand), ComponentId::Control);
  EXPECT_EQ(target_of(FaultKind::WrongLateralLocalization), ComponentId::Localization);
}

TEST(Faults, ParseAndRoundTrip) {
  const auto j = nlohmann::json::parse(R"({"target": "Perception", "kind": "WrongLateralDist",
      "trigger": {"t0_ms": 500, "t1_ms": 900, "object_id": 2, "region": {"center": [1, 2], "radius": 3}},
      "magnitude": {"value": 1.25}, "note": "shifted"})");
  const FaultSpec f = fault_from_json(j);
  EXPECT_EQ(f.kind, FaultKind::WrongLateralDist);
  EXPECT_EQ(f.trigger.t0, 500);
  EXPECT_EQ(f.trigger.t1, 900);
  EXPECT_EQ(*f.trigger.object_id, 2);
  EXPECT_EQ(f.trigger.region->radius, 3.0);
  EXPECT_EQ(f.magnitude.value, 1.25);
  const FaultSpec back = fault_from_json(nlohmann::json::parse(fault_to_json(f).dump()));
  EXPECT_EQ(fault_to_json(back).dump(), fault_to_json(f).dump());
}

TEST(Faults, TargetMismatchRejected) {
  const auto j = nlohmann::json::parse(R"({"target": "Control", "kind": "MissDetection"})");
  EXPECT_THROW(fault_from_json(j), ValidationError);
}

TEST(Faults, EmptyWindowRejected) {
  const auto j = nlohmann::json::parse(R"({"kind": "MissDetection", "trigger": {"t0_ms": 5, "t1_ms": 5}})");
  EXPECT_THROW(fault_from_json(j), ValidationError);
}

TEST(Faults, UnknownKindRejected) {
  EXPECT_THROW(fault_from_json(nlohmann::json::parse(R"({"kind": "Gremlins"})")), Error);
}

TEST(Faults, AcceptedShapes) {
  const auto one = nlohmann::json::parse(R"({"kind": "NoPlanningTrajectory"})");
  EXPECT_EQ(faults_from_json(one).size(), 1u);
  EXPECT_EQ(faults_from_json(nlohmann::json::array({one, one})).size(), 2u);
  EXPECT_EQ(faults_from_json({{"faults", nlohmann::json::array({one})}}).size(), 1u);
}

TEST(Faults, BenchmarkFaultFilesLoad) {
  const auto f = load_faults(dvca::testing::bench_dir() / "cs3_plan_path.json");
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0].kind, FaultKind::IncorrectPathPlanning);
  EXPECT_EQ(f[0].magnitude.value, -1.2);
}
