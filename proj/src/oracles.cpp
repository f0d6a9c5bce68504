#include "dvca/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>

#include "dvca/json_util.hpp"
#include "dvca/pipeline.hpp"

namespace dvca {

namespace {

double radius(const OrientedBox& b) { return b.half_extents.norm(); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

std::optional<SafeDistanceHit> check_safe_distance(std::span<const EgoState> log, const Scenario& scenario,
                                                   double c) {
  for (const auto& ego : log) {
    const OrientedBox eb = ego_box(ego, scenario.ego_size);
    std::optional<SafeDistanceHit> best;
    for (const auto& obj : scenario.objects) {
      const OrientedBox ob = bbox_at(obj, ego.t);
      if ((ob.center - eb.center).norm() > radius(eb) + radius(ob) + c) continue;
      const double d = min_obb_distance(eb, ob);
      if (d < c && (!best || d < best->distance)) {
        const double along = (ob.center - ego.p).dot(unit_from_heading(ego.heading));
        best = SafeDistanceHit{ego.t, obj.id, d, along < -scenario.ego_size.length / 2.0};
      }
    }
    if (best) return best;
  }
  return std::nullopt;
}

bool check_mission(std::span<const EgoState> log, Vec2 dest, double tolerance) {
  if (log.empty()) return false;
  return (log.back().p - dest).norm() <= tolerance;
}

std::optional<SpeedingHit> check_speeding(std::span<const EgoState> log, const LaneMap& map, double tolerance) {
  for (const auto& ego : log) {
    const auto hit = lane_at(map, ego.p);
    if (!hit) continue;
    if (ego.speed > hit->lane->speed_limit + tolerance) return SpeedingHit{ego.t, ego.speed, hit->lane->speed_limit};
  }
  return std::nullopt;
}

Verdict evaluate(std::span<const EgoState> log, const Scenario& scenario, const OracleConfig& config) {
  Verdict v;
  auto on = [&](ViolationKind k) { return config.enabled.count(k) > 0; };
  if (on(ViolationKind::SafeDistance)) {
    if (auto hit = check_safe_distance(log, scenario, config.safe_distance)) {
      std::string detail = "object " + std::to_string(hit->object_id) + " distance " + fmt(hit->distance);
      if (hit->rear_approach) detail += " rear-approach";
      v.violations.push_back({ViolationKind::SafeDistance, hit->t, std::move(detail)});
    }
  }
  if (on(ViolationKind::Speeding)) {
    if (auto hit = check_speeding(log, scenario.map, config.speed_tolerance)) {
      v.violations.push_back(
          {ViolationKind::Speeding, hit->t, "speed " + fmt(hit->speed) + " limit " + fmt(hit->limit)});
    }
  }
  if (on(ViolationKind::Mission) && !log.empty() && !check_mission(log, scenario.ego_dest, config.dest_tolerance)) {
    v.violations.push_back({ViolationKind::Mission, log.back().t,
                            "final distance to destination " + fmt((log.back().p - scenario.ego_dest).norm())});
  }
  std::stable_sort(v.violations.begin(), v.violations.end(),
                   [](const Violation& a, const Violation& b) { return a.t < b.t; });
  v.passed = v.violations.empty();
  return v;
}

bool is_held(const PlanningOut& plan) {
  if (plan.trajectory.empty()) return true;
  return std::all_of(plan.trajectory.begin(), plan.trajectory.end(),
                     [](const TrajectoryPoint& p) { return p.speed < 0.1; });
}

namespace {

bool stop_justified(const PlanningCheckContext& ctx, SimTime t) {
  const Scenario& sc = *ctx.scenario;
  const Route route = build_route(sc.map, ctx.ego.p, sc.ego_dest);
  if (route.empty()) return false;
  const double s_ego = project_onto_polyline(route.line, ctx.ego.p).s;
  const double s_end = s_ego + ctx.config.stall_lookahead;
  for (const auto& obj : sc.objects) {
    const OrientedBox box = bbox_at(obj, t);
    double s_min = std::numeric_limits<double>::infinity(), s_max = -s_min;
    double d_min = s_min, d_max = -s_min;
    for (Vec2 c : box.corners()) {
      const auto pr = project_onto_polyline(route.line, c);
      s_min = std::min(s_min, pr.s);
      s_max = std::max(s_max, pr.s);
      d_min = std::min(d_min, pr.lateral);
      d_max = std::max(d_max, pr.lateral);
    }
    const double half = route.width_at(s_ego) / 2.0;
    if (s_max < s_ego - sc.ego_size.length / 2.0 || s_min > s_end) continue;
    if (d_max <= -half || d_min >= half) continue;
    return true;
  }
  for (const auto& sig : sc.signals) {
    if (sig.color_at(t) == SignalColor::Green) continue;
    const auto pr = project_onto_polyline(route.line, sig.stop_line);
    if (pr.s >= s_ego && pr.s <= s_end) return true;
  }
  return false;
}

}  // namespace

bool planning_message_violates(std::size_t msg_index, const PlanningCheckContext& ctx) {
  const Message& msg = ctx.planning_row[msg_index];
  const auto& plan = std::get<PlanningOut>(msg.payload);
  const Scenario& sc = *ctx.scenario;
  const double c = ctx.config.safe_distance;
  const bool check_distance = ctx.config.enabled.count(ViolationKind::SafeDistance) > 0;
  const bool check_speed = ctx.config.enabled.count(ViolationKind::Speeding) > 0;

  // Objects are extrapolated with their true velocity at publish time.
  std::vector<std::pair<OrientedBox, Vec2>> now;
  if (check_distance) {
    for (const auto& obj : sc.objects) now.emplace_back(bbox_at(obj, msg.t_pub), object_pose_at(obj, msg.t_pub).v);
  }
  for (const auto& pt : plan.trajectory) {
    if (check_distance) {
      const OrientedBox eb = make_box(pt.p, pt.heading, sc.ego_size);
      const double dt = to_seconds(pt.t - msg.t_pub);
      for (const auto& [box, v] : now) {
        OrientedBox ob = box;
        ob.center += v * dt;
        if ((ob.center - eb.center).norm() > radius(eb) + radius(ob) + c) continue;
        if (min_obb_distance(eb, ob) < c) return true;
      }
    }
    if (check_speed) {
      const auto hit = lane_at(sc.map, pt.p);
      if (hit && pt.speed > hit->lane->speed_limit + ctx.config.speed_tolerance) return true;
    }
  }

  if (ctx.config.enabled.count(ViolationKind::Mission) == 0 || !is_held(plan)) return false;
  if ((ctx.ego.p - sc.ego_dest).norm() <= ctx.config.dest_tolerance) return false;
  SimTime start = msg.t_pub;
  for (std::size_t i = msg_index + 1; i-- > 0;) {
    const auto& p = std::get<PlanningOut>(ctx.planning_row[i].payload);
    if (!is_held(p)) break;
    start = ctx.planning_row[i].t_pub;
  }
  if (msg.t_pub - start < ctx.config.stall_persistence) return false;
  return !stop_justified(ctx, msg.t_pub);
}

}  // namespace dvca

namespace dvca {

OracleConfig oracle_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("/oracle", "expected an object");
  static const std::set<std::string> known{"enabled",         "safe_distance",  "dest_tolerance",
                                           "speed_tolerance", "stall_lookahead", "stall_persistence_ms"};
  for (const auto& [k, v] : j.items()) {
    if (!known.contains(k)) throw ValidationError("/oracle/" + k, "unknown field");
  }
  OracleConfig c;
  auto num = [&](const char* key, double& out) {
    if (j.contains(key)) out = json_util::number<double>(j, key, "/oracle");
  };
  num("safe_distance", c.safe_distance);
  num("dest_tolerance", c.dest_tolerance);
  num("speed_tolerance", c.speed_tolerance);
  num("stall_lookahead", c.stall_lookahead);
  if (j.contains("stall_persistence_ms")) {
    c.stall_persistence = json_util::number<SimTime>(j, "stall_persistence_ms", "/oracle");
  }
  if (j.contains("enabled")) {
    const auto& e = j.at("enabled");
    if (!e.is_array()) throw ValidationError("/oracle/enabled", "expected an array of violation kinds");
    c.enabled.clear();
    for (const auto& k : e) {
      if (!k.is_string()) throw ValidationError("/oracle/enabled", "expected a violation kind");
      c.enabled.insert(violation_kind_from_string(k.get<std::string>()));
    }
  }
  if (c.safe_distance < 0.0) throw ValidationError("/oracle/safe_distance", "must be >= 0");
  if (c.dest_tolerance < 0.0) throw ValidationError("/oracle/dest_tolerance", "must be >= 0");
  if (c.speed_tolerance < 0.0) throw ValidationError("/oracle/speed_tolerance", "must be >= 0");
  if (c.stall_persistence <= 0) throw ValidationError("/oracle/stall_persistence_ms", "must be > 0");
  return c;
}

nlohmann::ordered_json oracle_config_to_json(const OracleConfig& c) {
  nlohmann::ordered_json j;
  j["enabled"] = nlohmann::ordered_json::array();
  for (auto k : c.enabled) j["enabled"].push_back(to_string(k));
  j["safe_distance"] = c.safe_distance;
  j["dest_tolerance"] = c.dest_tolerance;
  j["speed_tolerance"] = c.speed_tolerance;
  j["stall_lookahead"] = c.stall_lookahead;
  j["stall_persistence_ms"] = c.stall_persistence;
  return j;
}

OracleConfig load_oracle_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open oracle config '" + path.string() + "'");
  try {
    return oracle_config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace dvca
