#include "dvca/substitutes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "dvca/errors.hpp"

namespace dvca {

namespace {

std::int64_t qfloor(double x, double unit) {
  // The small bias keeps exact multiples (0.6 / 0.2) from rounding down.
  return static_cast<std::int64_t>(std::floor(x / unit + 1e-9));
}

}  // namespace

StateKey quantize(const EgoState& ego, const QuantUnits& u) {
  const Vec2 v = ego.velocity();
  const Vec2 a = ego.acceleration();
  return StateKey{{qfloor(ego.p.x, u.p), qfloor(ego.p.y, u.p), qfloor(v.x, u.v), qfloor(v.y, u.v), qfloor(a.x, u.a),
                   qfloor(a.y, u.a)}};
}

PerceptionOut ideal_perception(const Scenario& scenario, SimTime t, Vec2 origin, double range) {
  PerceptionOut out;
  for (const auto& g : ground_truth_objects(scenario, t, origin, range)) {
    out.objects.push_back({g.id, g.kind, g.box, g.v});
  }
  return out;
}

PredictionOut ideal_prediction(const Scenario& scenario, SimTime t, Vec2 origin, double range, SimTime horizon,
                               SimTime step) {
  PredictionOut out;
  for (const auto& obj : scenario.objects) {
    if ((object_pose_at(obj, t).p - origin).norm() > range) continue;
    PredictedTrajectory tr{obj.id, {}};
    for (SimTime tau = 0; tau <= horizon; tau += step) tr.points.push_back({t + tau, object_pose_at(obj, t + tau).p});
    out.trajectories.push_back(std::move(tr));
  }
  return out;
}

LocalizationOut ideal_localization(const EgoState& truth) {
  return {truth.p, truth.heading, truth.speed, truth.accel};
}

EgoState sim_control_apply(const PlanningOut& plan, SimTime t, const EgoState& hold) {
  const auto& tr = plan.trajectory;
  if (tr.empty()) {
    EgoState s = hold;
    s.speed = 0.0;
    s.accel = 0.0;
    s.t = t;
    return s;
  }
  EgoState s;
  s.t = t;
  if (t <= tr.front().t || tr.size() == 1) {
    s.p = tr.front().p;
    s.heading = tr.front().heading;
    s.speed = tr.front().speed;
    if (tr.size() > 1) s.accel = (tr[1].speed - tr[0].speed) / to_seconds(tr[1].t - tr[0].t);
    return s;
  }
  if (t >= tr.back().t) {
    s.p = tr.back().p;
    s.heading = tr.back().heading;
    s.speed = tr.back().speed;
    return s;
  }
  auto it = std::upper_bound(tr.begin(), tr.end(), t, [](SimTime v, const TrajectoryPoint& p) { return v < p.t; });
  const TrajectoryPoint& b = *it;
  const TrajectoryPoint& a = *(it - 1);
  const double span = to_seconds(b.t - a.t);
  const double w = to_seconds(t - a.t) / span;
  s.p = a.p + (b.p - a.p) * w;
  s.heading = wrap_angle(a.heading + wrap_angle(b.heading - a.heading) * w);
  s.speed = a.speed + (b.speed - a.speed) * w;
  s.accel = (b.speed - a.speed) / span;
  return s;
}

std::vector<std::uint32_t> TraceStates::messages_in(ComponentId c, std::size_t s) const {
  std::vector<std::uint32_t> out;
  const auto& a = assignment[index(c)];
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == s) out.push_back(static_cast<std::uint32_t>(i + 1));
  }
  return out;
}

namespace {

TraceStates split_impl(const Trace& trace, const QuantUnits& units, Trace* fill) {
  TraceStates ts;
  for (auto c : kAllComponents) ts.assignment[index(c)].resize(trace.row(c).size());
  std::map<StateKey, std::uint32_t> visits;
  for (const Message* m : trace.publish_order()) {
    const StateKey key = quantize(trace.ego_at(m->t_pub), units);
    if (ts.states.empty() || ts.states.back().key != key) {
      if (!ts.states.empty()) ts.states.back().t_end = m->t_pub;
      const std::uint32_t ordinal = visits[key]++;
      ts.states.push_back({key, ordinal, m->t_pub, m->t_pub + 1});
    } else {
      ts.states.back().t_end = m->t_pub + 1;
    }
    ts.assignment[index(m->component)][m->seq - 1] = static_cast<std::uint32_t>(ts.states.size() - 1);
    if (fill != nullptr) fill->row(m->component)[m->seq - 1].state_key = key;
  }
  return ts;
}

}  // namespace

TraceStates split_trace(const Trace& trace, const QuantUnits& units) { return split_impl(trace, units, nullptr); }

TraceStates split_trace(Trace& trace, const QuantUnits& units) { return split_impl(trace, units, &trace); }

double state_distance(const StateKey& a, const StateKey& b) {
  static constexpr std::array<double, 6> w{1.0, 1.0, 0.5, 0.5, 0.25, 0.25};
  double d = 0.0;
  for (std::size_t i = 0; i < 6; ++i) d += w[i] * static_cast<double>(std::llabs(a.q[i] - b.q[i]));
  return d;
}

std::size_t match_state(const StateInfo& target, std::span<const StateInfo> states) {
  if (states.empty()) throw IndexError("match_state: no states to match against");
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].key == target.key && states[i].ordinal == target.ordinal) return i;
  }
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < states.size(); ++i) {
    const double d = state_distance(states[i].key, target.key);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

void StateTracker::observe(const EgoState& ego) {
  const StateKey key = quantize(ego, units_);
  if (started_ && key == key_) return;
  started_ = true;
  key_ = key;
  ordinal_ = counts_[key]++;
}

SubstitutionPlan SubstitutionPlan::ideal(std::span<const ComponentId> components) {
  SubstitutionPlan p;
  for (auto c : components) p[c].mode = SubstMode::IdealAll;
  return p;
}

SubstitutionPlan SubstitutionPlan::from_state(ComponentId c, const StateInfo& s) {
  SubstitutionPlan p;
  p[c].mode = SubstMode::IdealFromState;
  p[c].from = s;
  return p;
}

SubstitutionPlan SubstitutionPlan::within_states(ComponentId c, const StateInfo& first, const StateInfo& last) {
  SubstitutionPlan p;
  p[c].mode = SubstMode::IdealWithinStates;
  p[c].from = first;
  p[c].until = last.t_end;
  return p;
}

void SubstitutionPlan::validate() const {
  if ((*this)[ComponentId::Planning].mode != SubstMode::Original) {
    throw ValidationError("/plan/Planning", "planning has no idealized substitute");
  }
}

nlohmann::ordered_json plan_to_json(const SubstitutionPlan& plan) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (auto c : kAllComponents) {
    const auto& m = plan[c];
    nlohmann::ordered_json e;
    switch (m.mode) {
      case SubstMode::Original:
        e["mode"] = "Original";
        break;
      case SubstMode::IdealAll:
        e["mode"] = "IdealAll";
        break;
      case SubstMode::IdealFromState:
        e["mode"] = "IdealFromState";
        break;
      case SubstMode::IdealWithinStates:
        e["mode"] = "IdealWithinStates";
        break;
    }
    if (m.mode == SubstMode::IdealFromState || m.mode == SubstMode::IdealWithinStates) {
      e["key"] = m.from.key.q;
      e["ordinal"] = m.from.ordinal;
      e["t_first_ms"] = m.from.t_first;
    }
    if (m.mode == SubstMode::IdealWithinStates) e["until_ms"] = m.until;
    j[std::string(to_string(c))] = std::move(e);
  }
  return j;
}

bool SubstitutionState::ideal(ComponentId c, SimTime t) {
  const ComponentSubst& m = plan_[c];
  switch (m.mode) {
    case SubstMode::Original:
      return false;
    case SubstMode::IdealAll:
      return true;
    case SubstMode::IdealFromState:
    case SubstMode::IdealWithinStates: {
      bool& on = activated_[index(c)];
      if (!on) {
        const bool matched = tracker_.started() && tracker_.key() == m.from.key && tracker_.ordinal() == m.from.ordinal &&
                             t >= m.from.t_first;
        // A re-run is identical to the original until the first substitution,
        // so the entry time is a safe fallback for the key match.
        on = matched || t >= m.from.t_first;
      }
      if (m.mode == SubstMode::IdealWithinStates && t >= m.until) return false;
      return on;
    }
  }
  return false;
}

BestEffortResult best_effort_planning(const Scenario& scenario, const EgoState& ego, SimTime t,
                                      const PlannerParams& params, const VehicleLimits& limits) {
  BestEffortResult res;
  const Route route = build_route(scenario.map, ego.p, scenario.ego_dest);
  const int steps = static_cast<int>(params.horizon / params.step);
  const double dt = to_seconds(params.step);
  const auto stop_in_place = [&] {
    PlanningOut p;
    p.decision = Decision::Stop;
    p.coverage.emplace_back("best_effort.infeasible");
    double v = ego.speed;
    Vec2 pos = ego.p;
    for (int k = 0; k <= steps; ++k) {
      p.trajectory.push_back({t + params.step * k, pos, v, ego.heading});
      const double v_next = std::max(0.0, v - limits.max_decel * dt);
      pos += unit_from_heading(ego.heading) * (0.5 * (v + v_next) * dt);
      v = v_next;
    }
    return p;
  };
  if (route.empty()) {
    res.plan = stop_in_place();
    return res;
  }

  const auto pr = project_onto_polyline(route.line, ego.p);
  const double s_goal = project_onto_polyline(route.line, scenario.ego_dest).s;
  const double half_lane = route.width_at(pr.s) / 2.0;
  const double max_off = std::max(0.0, half_lane - scenario.ego_size.width / 2.0);
  const double d_res = 0.5;
  const double v_res = params.accel * dt;
  const int n_lat = 2 * static_cast<int>(std::floor(max_off / d_res)) + 1;
  const int lat_mid = n_lat / 2;
  const double v_max = std::min(params.comfort_speed, route.speed_limit_at(pr.s));
  const int n_v = static_cast<int>(std::floor(v_max / v_res)) + 1;
  const int v0 = std::clamp(static_cast<int>(std::lround(ego.speed / v_res)), 0, n_v - 1);
  const int lat0 = std::clamp(static_cast<int>(std::lround(pr.lateral / d_res)) + lat_mid, 0, n_lat - 1);
  const int max_brake = std::max(1, static_cast<int>(std::floor(limits.max_decel * dt / v_res)));

  struct Node {
    double s = -std::numeric_limits<double>::infinity();
    int prev_lat = -1;
    int prev_v = -1;
  };
  std::vector<std::vector<Node>> layer(steps + 1, std::vector<Node>(static_cast<std::size_t>(n_lat * n_v)));
  auto at = [&](int k, int lat, int v) -> Node& { return layer[k][static_cast<std::size_t>(lat * n_v + v)]; };
  auto world = [&](double s, int lat) {
    const PolylinePoint cp = polyline_at(route.line, s);
    return std::pair{cp.p + left_normal(cp.heading) * ((lat - lat_mid) * d_res), cp.heading};
  };
  auto collision_free = [&](double s, int lat, SimTime when) {
    const auto [p, h] = world(s, lat);
    const OrientedBox eb = make_box(p, h, scenario.ego_size);
    for (const auto& obj : scenario.objects) {
      if (min_obb_distance(eb, bbox_at(obj, when)) < params.safe_distance) return false;
    }
    return true;
  };

  at(0, lat0, v0).s = pr.s;
  for (int k = 0; k < steps; ++k) {
    for (int lat = 0; lat < n_lat; ++lat) {
      for (int v = 0; v < n_v; ++v) {
        const Node& cur = at(k, lat, v);
        if (!std::isfinite(cur.s)) continue;
        for (int dl = -1; dl <= 1; ++dl) {
          const int nl = lat + dl;
          if (nl < 0 || nl >= n_lat) continue;
          for (int dv = -max_brake; dv <= 1; ++dv) {
            const int nv = v + dv;
            if (nv < 0 || nv >= n_v) continue;
            double s = cur.s + 0.5 * (v + nv) * v_res * dt;
            if (s > s_goal) s = s_goal;
            Node& next = at(k + 1, nl, nv);
            if (s <= next.s) continue;
            if (!collision_free(s, nl, t + params.step * (k + 1))) continue;
            next = {s, lat, v};
          }
        }
      }
    }
  }
  int best_lat = -1, best_v = -1;
  double best_s = -std::numeric_limits<double>::infinity();
  for (int lat = 0; lat < n_lat; ++lat) {
    for (int v = 0; v < n_v; ++v) {
      const Node& n = at(steps, lat, v);
      // Prefer progress, then the lane center.
      if (n.s > best_s + 1e-9 || (std::abs(n.s - best_s) <= 1e-9 && std::abs(lat - lat_mid) < std::abs(best_lat - lat_mid))) {
        if (!std::isfinite(n.s)) continue;
        best_s = n.s;
        best_lat = lat;
        best_v = v;
      }
    }
  }
  if (best_lat < 0) {
    res.plan = stop_in_place();
    return res;
  }
  std::vector<std::pair<int, int>> path(steps + 1);
  path[steps] = {best_lat, best_v};
  for (int k = steps; k > 0; --k) {
    const Node& n = at(k, path[k].first, path[k].second);
    path[k - 1] = {n.prev_lat, n.prev_v};
  }
  res.feasible = true;
  res.plan.decision = Decision::Cruise;
  res.plan.coverage.emplace_back("best_effort.solved");
  for (int k = 0; k <= steps; ++k) {
    const auto [lat, v] = path[k];
    const double s = at(k, lat, v).s;
    auto [p, h] = world(s, lat);
    if (k == 0) {
      p = ego.p;
      h = ego.heading;
    }
    res.plan.trajectory.push_back({t + params.step * k, p, v * v_res, h});
  }
  return res;
}

}  // namespace dvca
