#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "dvca/messages.hpp"
#include "dvca/scenario.hpp"
#include "dvca/verdict.hpp"
#include "dvca/world.hpp"

namespace dvca {

struct SafeDistanceHit {
  SimTime t = 0;
  int object_id = 0;
  double distance = 0.0;
  /// The object reached the ego from behind.
  bool rear_approach = false;
};

std::optional<SafeDistanceHit> check_safe_distance(std::span<const EgoState> log, const Scenario& scenario, double c);

bool check_mission(std::span<const EgoState> log, Vec2 dest, double tolerance);

struct SpeedingHit {
  SimTime t = 0;
  double speed = 0.0;
  double limit = 0.0;
};

std::optional<SpeedingHit> check_speeding(std::span<const EgoState> log, const LaneMap& map, double tolerance);

Verdict evaluate(std::span<const EgoState> log, const Scenario& scenario, const OracleConfig& config);

/// Everything needed to judge one planning message in isolation.
struct PlanningCheckContext {
  const Scenario* scenario = nullptr;
  OracleConfig config;
  /// True ego state when the message was published.
  EgoState ego;
  /// The planning row up to and including the message (earlier messages are
  /// consulted for the stall persistence window).
  std::span<const Message> planning_row;
};

/// Index into `planning_row` of the message being judged.
bool planning_message_violates(std::size_t msg_index, const PlanningCheckContext& ctx);

/// Missing fields keep their defaults; unknown fields are rejected.
OracleConfig oracle_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json oracle_config_to_json(const OracleConfig& c);
OracleConfig load_oracle_config(const std::filesystem::path& path);

/// A plan counts as held when it is empty or never moves the ego.
bool is_held(const PlanningOut& plan);

}  // namespace dvca
