#include "dvca/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

namespace dvca {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

template <typename F>
void for_active(std::span<const FaultSpec> faults, ComponentId target, SimTime t, Vec2 trigger_p, F&& fn) {
  for (const auto& f : faults) {
    if (f.target == target && f.trigger.active(t, trigger_p)) fn(f);
  }
}

OrientedBox shifted(OrientedBox b, Vec2 d) {
  b.center += d;
  return b;
}

Vec2 interpolate(const PredictedTrajectory& tr, SimTime t) {
  const auto& pts = tr.points;
  if (t <= pts.front().t) return pts.front().p;
  if (t >= pts.back().t) return pts.back().p;
  auto it = std::upper_bound(pts.begin(), pts.end(), t, [](SimTime v, const PredictedPoint& q) { return v < q.t; });
  const auto& b = *it;
  const auto& a = *(it - 1);
  const double w = static_cast<double>(t - a.t) / static_cast<double>(b.t - a.t);
  return a.p + (b.p - a.p) * w;
}

/// Object extents in route coordinates.
struct Extent {
  double s_min = kInf, s_max = -kInf, d_min = kInf, d_max = -kInf;
};

Extent extent_of(const OrientedBox& box, const Route& route) {
  Extent e;
  for (Vec2 c : box.corners()) {
    const auto pr = project_onto_polyline(route.line, c);
    e.s_min = std::min(e.s_min, pr.s);
    e.s_max = std::max(e.s_max, pr.s);
    e.d_min = std::min(e.d_min, pr.lateral);
    e.d_max = std::max(e.d_max, pr.lateral);
  }
  return e;
}

struct SpeedCap {
  double s_start = 0.0;
  double v = 0.0;
  double decel = 1.0;
};

struct Obstacle {
  const PerceivedObject* obj = nullptr;
  std::vector<OrientedBox> boxes;  // one per trajectory step
  bool is_static = false;
  double radius = 0.0;
};

double circumradius(const OrientedBox& b) { return b.half_extents.norm(); }

}  // namespace

std::uint64_t stream_seed(std::uint64_t scenario_seed, ComponentId c, SimTime t) {
  return splitmix64(splitmix64(scenario_seed ^ (static_cast<std::uint64_t>(index(c)) << 56)) ^
                    static_cast<std::uint64_t>(t));
}

TickResult<PerceptionOut> perception_tick(std::span<const GroundTruthObject> truth, const EgoState& ego, SimTime t,
                                          std::span<const FaultSpec> faults, const AdsConfig& cfg,
                                          std::uint64_t seed) {
  TickResult<PerceptionOut> r;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (const auto& g : truth) {
    if ((g.box.center - ego.p).norm() > cfg.sensor_range) continue;
    PerceivedObject po{g.id, g.kind, g.box, g.v};
    bool dropped = false;
    for_active(faults, ComponentId::Perception, t, ego.p, [&](const FaultSpec& f) {
      if (dropped || !f.trigger.matches_object(g.id)) return;
      r.fault_affected = true;
      switch (f.kind) {
        case FaultKind::MissDetection:
          dropped = true;
          break;
        case FaultKind::WrongBBox:
          po.box.half_extents = {po.box.half_extents.x * f.magnitude.length_scale,
                                 po.box.half_extents.y * f.magnitude.width_scale};
          break;
        case FaultKind::WrongLongitudinalDist:
          po.box.center += unit_from_heading(ego.heading) * f.magnitude.value;
          break;
        case FaultKind::WrongLateralDist:
          po.box.center += left_normal(ego.heading) * f.magnitude.value;
          break;
        case FaultKind::WrongVelocity:
          po.v = po.v.value_or(Vec2{}) + unit_from_heading(po.box.heading) * f.magnitude.value;
          break;
        default:
          break;
      }
    });
    if (dropped) continue;
    if (cfg.perception_noise > 0.0) {
      po.box.center += Vec2{noise(rng), noise(rng)} * cfg.perception_noise;
    }
    r.out.objects.push_back(po);
  }
  return r;
}

TickResult<PredictionOut> prediction_tick(std::span<const PerceptionFrame> history, SimTime t, Vec2 ego_p,
                                          std::span<const FaultSpec> faults, const PlannerParams& params) {
  TickResult<PredictionOut> r;
  if (history.empty() || history.back().out == nullptr) return r;
  const PerceptionFrame& latest = history.back();
  const int steps = static_cast<int>(params.horizon / params.step);

  for (const auto& obj : latest.out->objects) {
    Vec2 v;
    if (obj.v) {
      v = *obj.v;
    } else {
      for (auto it = history.rbegin() + 1; it != history.rend(); ++it) {
        const auto& objs = it->out->objects;
        auto prev = std::find_if(objs.begin(), objs.end(), [&](const PerceivedObject& o) { return o.id == obj.id; });
        if (prev != objs.end() && it->t < latest.t) {
          v = (obj.box.center - prev->box.center) / to_seconds(latest.t - it->t);
          break;
        }
      }
    }
    bool drop = false;
    for_active(faults, ComponentId::Prediction, t, ego_p, [&](const FaultSpec& f) {
      if (!f.trigger.matches_object(obj.id)) return;
      r.fault_affected = true;
      if (f.kind == FaultKind::NoPredictionTrajectory) drop = true;
      if (f.kind == FaultKind::WrongPredictionTrajectory) v = f.magnitude.velocity;
    });
    if (drop) continue;
    PredictedTrajectory tr{obj.id, {}};
    const Vec2 p0 = obj.box.center + v * to_seconds(t - latest.t);
    for (int k = 0; k <= steps; ++k) {
      const SimTime tau = params.step * k;
      tr.points.push_back({t + tau, p0 + v * to_seconds(tau)});
    }
    r.out.trajectories.push_back(std::move(tr));
  }
  return r;
}

Vec2 obstacle_offset(const PerceivedObject& obj, const PredictedTrajectory* pred, SimTime t, SimTime tau,
                     double static_speed) {
  if (pred == nullptr || pred->points.size() < 2) return {};
  std::vector<Vec2> path;
  path.reserve(pred->points.size());
  for (const auto& q : pred->points) path.push_back(q.p);
  if (polyline_length(path) < 0.1) return {};
  const Vec2 base = interpolate(*pred, t);
  const double speed = obj.v ? obj.v->norm() : 0.0;
  if (speed >= static_speed) {
    const double s0 = project_onto_polyline(path, base).s;
    return polyline_at(path, s0 + speed * to_seconds(tau)).p - base;
  }
  return interpolate(*pred, t + tau) - base;
}

double Route::speed_limit_at(double s) const {
  for (const auto& sp : spans) {
    if (s < sp.s1) return sp.speed_limit;
  }
  return spans.empty() ? kInf : spans.back().speed_limit;
}

double Route::width_at(double s) const {
  for (const auto& sp : spans) {
    if (s < sp.s1) return sp.width;
  }
  return spans.empty() ? 3.5 : spans.back().width;
}

Route build_route(const LaneMap& map, Vec2 from, Vec2 to) {
  Route route;
  const auto a = lane_at(map, from);
  const auto b = lane_at(map, to);
  if (!a || !b) return route;

  // Breadth-first search over successor links.
  std::vector<int> parent_of(map.lanes.size(), -1);
  std::vector<bool> seen(map.lanes.size(), false);
  auto idx = [&](const Lane* l) { return static_cast<int>(l - map.lanes.data()); };
  std::deque<int> queue{idx(a->lane)};
  seen[idx(a->lane)] = true;
  while (!queue.empty()) {
    const int cur = queue.front();
    queue.pop_front();
    if (cur == idx(b->lane)) break;
    for (int succ : map.lanes[cur].successors) {
      const Lane* l = map.find(succ);
      if (l == nullptr || seen[idx(l)]) continue;
      seen[idx(l)] = true;
      parent_of[idx(l)] = cur;
      queue.push_back(idx(l));
    }
  }
  if (!seen[idx(b->lane)]) return route;

  std::vector<int> chain;
  for (int cur = idx(b->lane); cur != -1; cur = parent_of[cur]) chain.push_back(cur);
  std::reverse(chain.begin(), chain.end());
  for (int li : chain) {
    const Lane& lane = map.lanes[li];
    const double s0 = route.line.empty() ? 0.0 : polyline_length(route.line);
    for (Vec2 p : lane.centerline) {
      if (!route.line.empty() && (route.line.back() - p).norm() < 1e-9) continue;
      route.line.push_back(p);
    }
    route.spans.push_back({s0, polyline_length(route.line), lane.speed_limit, lane.width});
  }
  return route;
}

TickResult<PlanningOut> planning_tick(const PlanningInput& in, std::span<const FaultSpec> faults,
                                      const PlannerParams& P) {
  TickResult<PlanningOut> r;
  PlanningOut& out = r.out;
  auto cover = [&](const char* tag) { out.coverage.emplace_back(tag); };
  const Scenario& sc = *in.scenario;
  const LocalizationOut& loc = in.localization;
  const double L = sc.ego_size.length;
  const double W = sc.ego_size.width;
  const double c = P.safe_distance;
  const int steps = static_cast<int>(P.horizon / P.step);
  const double dt = to_seconds(P.step);

  const FaultSpec* path_fault = nullptr;
  const FaultSpec* speed_fault = nullptr;
  bool no_plan = false;
  for_active(faults, ComponentId::Planning, in.t, in.trigger_p, [&](const FaultSpec& f) {
    if (f.kind == FaultKind::IncorrectPathPlanning) path_fault = &f;
    if (f.kind == FaultKind::IncorrectSpeedPlanning) speed_fault = &f;
    if (f.kind == FaultKind::NoPlanningTrajectory) no_plan = true;
  });
  if (no_plan) {
    cover("fault.no_trajectory");
    out.decision = Decision::Stop;
    r.fault_affected = true;
    return r;
  }

  Route route = build_route(sc.map, loc.p, sc.ego_dest);
  bool off_route = false;
  if (route.empty()) {
    cover("route.none");
    off_route = true;
    const Vec2 dir = unit_from_heading(loc.heading);
    route.line = {loc.p - dir * 10.0, loc.p + dir * 500.0};
    route.spans = {{0.0, 510.0, kInf, 3.5}};
  }
  const auto ego_pr = project_onto_polyline(route.line, loc.p);
  const double s0 = ego_pr.s;
  const double d0 = ego_pr.lateral;
  const double v0 = loc.speed;
  const double s_dest = off_route ? s0 : project_onto_polyline(route.line, sc.ego_dest).s;

  if (!off_route && s_dest - s0 < 1.0 && v0 < 0.5) {
    cover("dest.reached");
    out.decision = Decision::Stop;
    for (int k = 0; k <= steps; ++k) out.trajectory.push_back({in.t + P.step * k, loc.p, 0.0, loc.heading});
    return r;
  }

  // Obstacle futures.
  std::vector<Obstacle> obstacles;
  if (in.perception != nullptr) {
    for (const auto& obj : in.perception->objects) {
      const PredictedTrajectory* pred = in.prediction ? in.prediction->find(obj.id) : nullptr;
      Obstacle o;
      o.obj = &obj;
      o.radius = circumradius(obj.box);
      for (int k = 0; k <= steps; ++k) {
        o.boxes.push_back(shifted(obj.box, obstacle_offset(obj, pred, in.t, P.step * k, P.static_speed)));
      }
      const double speed = obj.v ? obj.v->norm() : 0.0;
      o.is_static = speed < P.static_speed && (o.boxes.back().center - o.boxes.front().center).norm() < 0.1;
      obstacles.push_back(std::move(o));
    }
  }

  // Lateral target: nudge around static obstacles intruding into the corridor.
  const double half_lane = route.width_at(s0) / 2.0;
  const double max_off = std::max(0.0, half_lane - W / 2.0);
  const double band = W / 2.0 + c + P.nudge_clearance;
  double lo = -max_off;
  double hi = max_off;
  bool nudge = false;
  double nudge_start = kInf;
  for (const auto& o : obstacles) {
    if (!o.is_static) continue;
    const Extent e = extent_of(o.boxes.front(), route);
    if (e.s_max < s0 - L / 2.0 - 0.5 || e.s_min > s0 + P.nudge_lookahead) continue;
    if (e.d_max <= -band || e.d_min >= band) continue;
    cover("nudge.candidate");
    if (e.d_min + e.d_max >= 0.0) {
      hi = std::min(hi, e.d_min - band);
    } else {
      lo = std::max(lo, e.d_max + band);
    }
    nudge = true;
    nudge_start = std::min(nudge_start, e.s_min);
  }
  double d_target = 0.0;
  if (nudge) {
    if (lo <= hi) {
      d_target = std::clamp(0.0, lo, hi);
      cover("nudge.applied");
      out.decision = Decision::Nudge;
    } else {
      cover("nudge.infeasible");
    }
  }
  double blend = std::max(8.0, 1.5 * v0 + 4.0);
  if (out.decision == Decision::Nudge) blend = std::clamp(nudge_start - (s0 + L / 2.0) - 2.0, 3.0, blend);
  // Cubic Hermite blend from the current offset and heading to the target.
  const double m0 = std::tan(std::clamp(wrap_angle(loc.heading - ego_pr.heading), -0.5, 0.5)) * blend;
  auto lateral_at = [&](double s) {
    const double x = std::clamp((s - s0) / blend, 0.0, 1.0);
    const double x2 = x * x, x3 = x2 * x;
    return (2 * x3 - 3 * x2 + 1) * d0 + (x3 - 2 * x2 + x) * m0 + (3 * x2 - 2 * x3) * d_target;
  };
  auto lateral_slope = [&](double s) {
    const double x = (s - s0) / blend;
    if (x < 0.0 || x > 1.0) return 0.0;
    return ((6 * x * x - 6 * x) * d0 + (3 * x * x - 4 * x + 1) * m0 + (6 * x - 6 * x * x) * d_target) / blend;
  };

  // Speed caps.
  const double base_bias = speed_fault ? speed_fault->magnitude.value : 0.0;
  std::vector<SpeedCap> caps;
  if (!off_route) caps.push_back({s_dest, 0.0, P.dest_decel});
  if (off_route) caps.push_back({s0, 0.0, P.max_decel});
  for (const auto& sig : sc.signals) {
    const SignalColor color = sig.color_at(in.t);
    if (color == SignalColor::Green || off_route) continue;
    const auto pr = project_onto_polyline(route.line, sig.stop_line);
    if (pr.distance > route.width_at(pr.s) || pr.s < s0 + L / 2.0 - 0.5) continue;
    const double s_stop = pr.s - L / 2.0;
    const double need = s_stop > s0 ? v0 * v0 / (2.0 * (s_stop - s0)) : kInf;
    if (color == SignalColor::Yellow && need > P.comfort_decel) continue;
    if (need > P.max_decel) continue;
    cover("signal.stop");
    caps.push_back({s_stop, 0.0, std::max(need, P.comfort_decel)});
  }

  const double band_c = W / 2.0 + c + P.conflict_margin;
  for (const auto& o : obstacles) {
    if (o.is_static || speed_fault) continue;
    const Extent e = extent_of(o.boxes.front(), route);
    if (e.s_min < s0 + L / 2.0 || e.d_max <= -band_c || e.d_min >= band_c) continue;
    const Vec2 v_est = (o.boxes.back().center - o.boxes.front().center) / to_seconds(P.horizon);
    const double v_lon = v_est.dot(unit_from_heading(polyline_at(route.line, e.s_min).heading));
    if (v_lon < P.static_speed) continue;
    cover("follow.lead");
    const double gap = L / 2.0 + c + P.stop_clearance + 2.0 + v_lon;
    caps.push_back({e.s_min - gap, v_lon, P.comfort_decel});
  }

  std::vector<double> s_k(steps + 1), v_k(steps + 1);
  auto build_profile = [&] {
    auto base = [&](double s) {
      return speed_fault ? P.comfort_speed + base_bias : std::min(P.comfort_speed, route.speed_limit_at(s));
    };
    auto capped = [&](double s) {
      double v = kInf;
      for (const auto& cap : caps) {
        v = std::min(v, s >= cap.s_start ? cap.v : std::sqrt(cap.v * cap.v + 2.0 * cap.decel * (cap.s_start - s)));
      }
      return v;
    };
    s_k[0] = s0;
    v_k[0] = v0;
    for (int k = 1; k <= steps; ++k) {
      const double s_pred = s_k[k - 1] + v_k[k - 1] * dt;
      const double cruise = std::max(base(s_pred), v_k[k - 1] - P.comfort_decel * dt);
      double v = std::min({v_k[k - 1] + P.accel * dt, cruise, capped(s_pred)});
      v = std::max({v, v_k[k - 1] - P.max_decel * dt, 0.0});
      v_k[k] = v;
      s_k[k] = s_k[k - 1] + 0.5 * (v_k[k - 1] + v) * dt;
    }
  };
  auto pose_at = [&](double s) {
    const PolylinePoint cp = polyline_at(route.line, s);
    const double d = lateral_at(s);
    return std::pair{cp.p + left_normal(cp.heading) * d, wrap_angle(cp.heading + std::atan(lateral_slope(s)))};
  };
  auto first_conflict = [&](const std::vector<bool>& skip) -> int {
    const double margin = c + P.conflict_margin;
    for (int k = 0; k <= steps; ++k) {
      const auto [p, h] = k == 0 ? std::pair{loc.p, loc.heading} : pose_at(s_k[k]);
      const OrientedBox ebox = make_box(p, h, sc.ego_size);
      const double er = circumradius(ebox);
      for (std::size_t i = 0; i < obstacles.size(); ++i) {
        if (skip[i]) continue;
        const OrientedBox& ob = obstacles[i].boxes[k];
        if ((ob.center - p).norm() > er + obstacles[i].radius + margin) continue;
        if (min_obb_distance(ebox, ob) < margin) return static_cast<int>(i);
      }
    }
    return -1;
  };

  build_profile();
  const bool suppress_stops = speed_fault != nullptr;
  if (suppress_stops) cover("fault.stop_removed");
  std::vector<bool> handled(obstacles.size(), false);
  while (true) {
    const int hit = first_conflict(handled);
    if (hit < 0) break;
    handled[hit] = true;
    // Nearest point where the obstacle enters the corridor along the path.
    double s_int = kInf;
    for (const auto& box : obstacles[hit].boxes) {
      const Extent e = extent_of(box, route);
      const double d_path = lateral_at(std::max(e.s_min, s0));
      if (e.d_max <= d_path - band_c || e.d_min >= d_path + band_c) continue;
      if (e.s_max < s0 - L / 2.0) continue;
      s_int = std::min(s_int, e.s_min);
    }
    if (!std::isfinite(s_int)) {
      cover("conflict.unresolved");
      continue;
    }
    if (suppress_stops) continue;
    const double s_stop = s_int - (c + P.stop_clearance) - L / 2.0;
    const double need = s_stop > s0 + 1e-3 ? v0 * v0 / (2.0 * (s_stop - s0)) : kInf;
    if (need > P.max_decel) {
      cover("stop.emergency");
      out.decision = Decision::Emergency;
      caps.push_back({s0, 0.0, P.max_decel});
    } else {
      cover("stop.obstacle");
      if (out.decision != Decision::Emergency) out.decision = Decision::Stop;
      caps.push_back({s_stop, 0.0, std::max(need, P.comfort_decel)});
    }
    build_profile();
  }
  if (out.decision == Decision::Cruise) cover("cruise");

  if (path_fault) {
    cover("fault.path_bias");
    d_target += path_fault->magnitude.value;
  }
  for (int k = 0; k <= steps; ++k) {
    const auto [p, h] = k == 0 ? std::pair{loc.p, loc.heading} : pose_at(s_k[k]);
    out.trajectory.push_back({in.t + P.step * k, p, v_k[k], h});
  }
  r.fault_affected = path_fault != nullptr || speed_fault != nullptr;
  return r;
}

TickResult<ControlOut> control_tick(const PlanningOut* plan, const LocalizationOut& loc, SimTime t, Vec2 trigger_p,
                                    std::span<const FaultSpec> faults, const AdsConfig& cfg) {
  TickResult<ControlOut> r;
  ControlOut& cmd = r.out;
  const VehicleLimits& lim = cfg.vehicle;
  if (plan == nullptr || plan->trajectory.empty()) {
    cmd = {-lim.max_decel, 0.0};
  } else {
    const auto& tr = plan->trajectory;
    std::vector<Vec2> path;
    path.reserve(tr.size());
    for (const auto& q : tr) path.push_back(q.p);
    const double ld = std::max(cfg.control.min_lookahead, cfg.control.lookahead_time * loc.speed);
    if (polyline_length(path) > 1e-6) {
      const auto pr = project_onto_polyline(path, loc.p);
      const Vec2 target = polyline_at(path, pr.s + ld).p;
      const Vec2 rel = target - loc.p;
      const double alpha = wrap_angle(std::atan2(rel.y, rel.x) - loc.heading);
      cmd.steer = std::atan(2.0 * lim.wheelbase * std::sin(alpha) / ld);
    }
    auto speed_at = [&](SimTime q) {
      if (q <= tr.front().t) return tr.front().speed;
      if (q >= tr.back().t) return tr.back().speed;
      auto it = std::upper_bound(tr.begin(), tr.end(), q, [](SimTime v, const TrajectoryPoint& p) { return v < p.t; });
      const double w = static_cast<double>(q - (it - 1)->t) / static_cast<double>(it->t - (it - 1)->t);
      return (it - 1)->speed + (it->speed - (it - 1)->speed) * w;
    };
    const double v_ref = speed_at(t);
    const double a_ff = (speed_at(t + 100) - v_ref) / 0.1;
    cmd.accel_cmd = a_ff + cfg.control.speed_gain * (v_ref - loc.speed);
    if (v_ref < 0.05 && loc.speed < 0.1) cmd.accel_cmd = std::min(cmd.accel_cmd, -1.0);
  }
  for_active(faults, ComponentId::Control, t, trigger_p, [&](const FaultSpec& f) {
    if (f.kind == FaultKind::WrongLongitudinalCommand) cmd.accel_cmd += f.magnitude.value;
    if (f.kind == FaultKind::WrongLateralCommand) cmd.steer += f.magnitude.value;
    r.fault_affected = true;
  });
  cmd.accel_cmd = std::clamp(cmd.accel_cmd, -lim.max_decel, lim.max_accel);
  cmd.steer = std::clamp(cmd.steer, -lim.max_steer, lim.max_steer);
  return r;
}

TickResult<LocalizationOut> localization_tick(const EgoState& truth, SimTime t, std::span<const FaultSpec> faults) {
  TickResult<LocalizationOut> r;
  r.out = {truth.p, truth.heading, truth.speed, truth.accel};
  for_active(faults, ComponentId::Localization, t, truth.p, [&](const FaultSpec& f) {
    if (f.kind != FaultKind::WrongLateralLocalization) return;
    r.out.p += left_normal(truth.heading) * f.magnitude.value;
    r.fault_affected = true;
  });
  return r;
}

}  // namespace dvca
