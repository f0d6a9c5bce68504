#include "dvca/world.hpp"

#include <algorithm>
#include <cmath>

namespace dvca {

EgoState step_ego(const EgoState& state, const ControlOut& cmd, SimTime dt_ms, const VehicleLimits& limits) {
  const double dt = to_seconds(dt_ms);
  const double accel = std::clamp(cmd.accel_cmd, -limits.max_decel, limits.max_accel);
  const double steer = std::clamp(cmd.steer, -limits.max_steer, limits.max_steer);

  EgoState next = state;
  const double yaw_rate = state.speed / limits.wheelbase * std::tan(steer);
  const double dh = yaw_rate * dt;
  if (std::abs(dh) > 1e-12) {
    const double radius = state.speed / yaw_rate;
    const double h0 = state.heading;
    next.p = state.p + Vec2{std::sin(h0 + dh) - std::sin(h0), std::cos(h0) - std::cos(h0 + dh)} * radius;
  } else {
    next.p = state.p + unit_from_heading(state.heading) * (state.speed * dt);
  }
  next.heading = wrap_angle(state.heading + dh);
  next.speed = std::max(0.0, state.speed + accel * dt);
  next.accel = (next.speed - state.speed) / dt;
  next.t = state.t + dt_ms;
  return next;
}

OrientedBox ego_box(const EgoState& state, const Size3& size) {
  return make_box(state.p, state.heading, size);
}

std::vector<GroundTruthObject> ground_truth_objects(const Scenario& scenario, SimTime t, Vec2 origin,
                                                    double range) {
  std::vector<GroundTruthObject> out;
  for (const auto& obj : scenario.objects) {
    const ObjectKinematics k = object_pose_at(obj, t);
    if ((k.p - origin).norm() > range) continue;
    out.push_back({obj.id, obj.kind, bbox_at(obj, t), k.v});
  }
  return out;
}

}  // namespace dvca
