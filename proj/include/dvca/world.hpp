#pragma once

#include <limits>
#include <vector>

#include "dvca/messages.hpp"
#include "dvca/scenario.hpp"

namespace dvca {

struct EgoState {
  Vec2 p;
  double heading = 0.0;
  double speed = 0.0;  // never negative
  double accel = 0.0;
  SimTime t = 0;

  Vec2 velocity() const { return unit_from_heading(heading) * speed; }
  Vec2 acceleration() const { return unit_from_heading(heading) * accel; }
  Waypoint waypoint() const { return {p, velocity(), acceleration(), t}; }
};

struct VehicleLimits {
  double wheelbase = 2.8;
  double max_accel = 3.0;
  double max_decel = 8.0;
  double max_steer = 0.5;
};

/// Kinematic bicycle update over `dt_ms`. Heading and position follow the exact
/// circular arc for the current speed; speed is updated afterwards with the
/// clamped command and never drops below zero.
EgoState step_ego(const EgoState& state, const ControlOut& cmd, SimTime dt_ms,
                  const VehicleLimits& limits = {});

OrientedBox ego_box(const EgoState& state, const Size3& size);

struct GroundTruthObject {
  int id = 0;
  ObjectKind kind = ObjectKind::StaticObstacle;
  OrientedBox box;
  Vec2 v;
};

/// Scenario objects whose box center lies within `range` of `origin` at `t`.
std::vector<GroundTruthObject> ground_truth_objects(const Scenario& scenario, SimTime t, Vec2 origin,
                                                    double range = std::numeric_limits<double>::infinity());

}  // namespace dvca
