#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "dvca/faults.hpp"
#include "dvca/messages.hpp"
#include "dvca/scenario.hpp"
#include "dvca/world.hpp"

namespace dvca {

struct PlannerParams {
  double comfort_speed = 10.0;
  double accel = 2.0;          // comfort acceleration
  double comfort_decel = 2.0;  // used for speed caps and late stops
  double max_decel = 8.0;
  SimTime horizon = 3000;
  SimTime step = 100;
  double safe_distance = 0.3;     // c, shared with the oracle
  double stop_clearance = 0.5;    // stop ends c + this before the conflict point
  double conflict_margin = 0.3;   // trajectory/obstacle distance below c + this is a conflict
  double nudge_clearance = 0.5;   // nudged path keeps the ego edge c + this from the obstacle
  double nudge_lookahead = 40.0;
  double static_speed = 0.5;      // perceived speed below this counts as static
  double dest_decel = 1.5;
};

struct ControlParams {
  double min_lookahead = 3.0;
  double lookahead_time = 0.5;
  double speed_gain = 1.0;
};

struct AdsConfig {
  /// Publishing period per component, indexed by ComponentId.
  std::array<SimTime, kComponentCount> period{100, 100, 100, 10, 10};
  double sensor_range = 60.0;
  double perception_noise = 0.0;  // std-dev of position noise, meters
  std::size_t prediction_history = 5;
  PlannerParams planner;
  ControlParams control;
  VehicleLimits vehicle;
  std::vector<FaultSpec> faults;
  bool best_effort_planning = false;

  SimTime period_of(ComponentId c) const { return period[index(c)]; }
};

template <typename T>
struct TickResult {
  T out;
  bool fault_affected = false;
};

/// Seed of the random stream of one component execution. Streams depend only
/// on (scenario seed, component, tick time), never on other components.
std::uint64_t stream_seed(std::uint64_t scenario_seed, ComponentId c, SimTime t);

TickResult<PerceptionOut> perception_tick(std::span<const GroundTruthObject> truth, const EgoState& ego, SimTime t,
                                          std::span<const FaultSpec> faults, const AdsConfig& cfg,
                                          std::uint64_t seed);

/// `history` holds recent perception outputs with their publish times, oldest first.
struct PerceptionFrame {
  SimTime t = 0;
  const PerceptionOut* out = nullptr;
};
TickResult<PredictionOut> prediction_tick(std::span<const PerceptionFrame> history, SimTime t, Vec2 ego_p,
                                          std::span<const FaultSpec> faults, const PlannerParams& params);

struct PlanningInput {
  const Scenario* scenario = nullptr;
  const PerceptionOut* perception = nullptr;  // may be null before the first frame
  const PredictionOut* prediction = nullptr;
  LocalizationOut localization;
  SimTime t = 0;
  /// Position used to evaluate fault triggers (the true ego position).
  Vec2 trigger_p;
};
TickResult<PlanningOut> planning_tick(const PlanningInput& in, std::span<const FaultSpec> faults,
                                      const PlannerParams& params);

TickResult<ControlOut> control_tick(const PlanningOut* plan, const LocalizationOut& loc, SimTime t, Vec2 trigger_p,
                                    std::span<const FaultSpec> faults, const AdsConfig& cfg);

TickResult<LocalizationOut> localization_tick(const EgoState& truth, SimTime t, std::span<const FaultSpec> faults);

/// Future position offset of a perceived obstacle `tau` ms after `t`,
/// combining its perceived velocity with the predicted path shape.
Vec2 obstacle_offset(const PerceivedObject& obj, const PredictedTrajectory* pred, SimTime t, SimTime tau,
                     double static_speed);

/// A route through the lane graph expressed as one polyline.
struct Route {
  std::vector<Vec2> line;
  struct Span {
    double s0 = 0.0;
    double s1 = 0.0;
    double speed_limit = 0.0;
    double width = 0.0;
  };
  std::vector<Span> spans;

  double speed_limit_at(double s) const;
  double width_at(double s) const;
  bool empty() const { return line.size() < 2; }
};

/// Shortest lane sequence (by lane count) from the lane under `from` to the
/// lane under `to`; empty when either point is off-map or unreachable.
Route build_route(const LaneMap& map, Vec2 from, Vec2 to);

}  // namespace dvca
