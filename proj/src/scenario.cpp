#include "dvca/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <queue>
#include <set>

#include "dvca/errors.hpp"
#include "dvca/json_util.hpp"

namespace dvca {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr double kStillSpeed = 1e-9;

bool finite(const Waypoint& w) { return w.p.finite() && w.v.finite() && w.a.finite(); }

}  // namespace

std::string_view to_string(ObjectKind k) {
  switch (k) {
    case ObjectKind::Pedestrian: return "Pedestrian";
    case ObjectKind::Vehicle: return "Vehicle";
    case ObjectKind::StaticObstacle: return "StaticObstacle";
    case ObjectKind::Infrastructure: return "Infrastructure";
  }
  return "?";
}

ObjectKind object_kind_from_string(std::string_view s) {
  for (auto k : {ObjectKind::Pedestrian, ObjectKind::Vehicle, ObjectKind::StaticObstacle,
                 ObjectKind::Infrastructure}) {
    if (to_string(k) == s) return k;
  }
  throw ParseError("unknown object kind '" + std::string(s) + "'");
}

std::string_view to_string(SignalColor c) {
  switch (c) {
    case SignalColor::Red: return "Red";
    case SignalColor::Yellow: return "Yellow";
    case SignalColor::Green: return "Green";
  }
  return "?";
}

const Lane* LaneMap::find(int id) const {
  for (const auto& l : lanes) {
    if (l.id == id) return &l;
  }
  return nullptr;
}

bool LaneMap::reachable(int from, int to) const {
  std::set<int> seen{from};
  std::queue<int> open;
  open.push(from);
  while (!open.empty()) {
    const int cur = open.front();
    open.pop();
    if (cur == to) return true;
    const Lane* lane = find(cur);
    if (!lane) continue;
    for (int nxt : lane->successors) {
      if (seen.insert(nxt).second) open.push(nxt);
    }
  }
  return false;
}

SignalColor TrafficSignal::color_at(SimTime t) const {
  for (const auto& ph : phases) {
    if (t >= ph.start && t < ph.end) return ph.color;
  }
  return phases.empty() ? SignalColor::Green : phases.back().color;
}

const TrafficObject* Scenario::find_object(int id) const {
  for (const auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

ObjectKinematics object_pose_at(const TrafficObject& obj, SimTime t) {
  const auto& wps = obj.waypoints;
  if (t <= wps.front().t) return {wps.front().p, wps.front().v, wps.front().a};
  if (t >= wps.back().t) return {wps.back().p, wps.back().v, wps.back().a};
  auto hi = std::upper_bound(wps.begin(), wps.end(), t,
                             [](SimTime q, const Waypoint& w) { return q < w.t; });
  const Waypoint& b = *hi;
  const Waypoint& a = *(hi - 1);
  const double f = static_cast<double>(t - a.t) / static_cast<double>(b.t - a.t);
  return {a.p + (b.p - a.p) * f, a.v + (b.v - a.v) * f, a.a};
}

double object_heading_at(const TrafficObject& obj, SimTime t) {
  const ObjectKinematics k = object_pose_at(obj, t);
  if (k.v.norm() > kStillSpeed) return std::atan2(k.v.y, k.v.x);
  // Zero velocity: keep the heading of the last segment that moved before t.
  const auto& wps = obj.waypoints;
  std::size_t last = 0;
  while (last + 1 < wps.size() && wps[last + 1].t <= t) ++last;
  for (std::size_t i = last; i >= 1; --i) {
    const Vec2 d = wps[i].p - wps[i - 1].p;
    if (d.norm() > kStillSpeed) return std::atan2(d.y, d.x);
  }
  return obj.heading_override.value_or(0.0);
}

OrientedBox make_box(Vec2 center, double heading, const Size3& size) {
  return {center, {size.length / 2.0, size.width / 2.0}, heading};
}

OrientedBox bbox_at(const TrafficObject& obj, SimTime t) {
  return make_box(object_pose_at(obj, t).p, object_heading_at(obj, t), obj.size);
}

std::optional<LaneHit> lane_at(const LaneMap& map, Vec2 p) {
  std::optional<LaneHit> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& lane : map.lanes) {
    const PolylineProjection proj = project_onto_polyline(lane.centerline, p);
    if (proj.distance > lane.width / 2.0) continue;
    const bool better = proj.distance < best_dist ||
                        (proj.distance == best_dist && best && lane.id < best->lane->id);
    if (better) {
      best_dist = proj.distance;
      best = LaneHit{&lane, proj.s, proj.lateral};
    }
  }
  return best;
}

namespace {

Size3 size_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw ValidationError(path, "expected [length, width, height]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

ordered_json size_to_json(const Size3& s) { return ordered_json::array({s.length, s.width, s.height}); }

}  // namespace

Scenario scenario_from_json(const json& j) {
  using namespace json_util;
  if (!j.is_object()) throw ParseError("scenario must be a JSON object");
  Scenario s;
  try {
    s.name = j.value("name", std::string{});
    const json& map = field(j, "map", "");
    const json& lanes = field(map, "lanes", "/map");
    for (std::size_t i = 0; i < lanes.size(); ++i) {
      const std::string path = "/map/lanes/" + std::to_string(i);
      const json& lj = lanes[i];
      Lane lane;
      lane.id = number<int>(lj, "id", path);
      for (std::size_t k = 0; k < field(lj, "centerline", path).size(); ++k) {
        lane.centerline.push_back(vec(lj["centerline"][k], path + "/centerline/" + std::to_string(k)));
      }
      lane.width = number<double>(lj, "width", path);
      lane.speed_limit = number<double>(lj, "speed_limit", path);
      if (lj.contains("successors")) lane.successors = lj["successors"].get<std::vector<int>>();
      s.map.lanes.push_back(std::move(lane));
    }

    const json& ego = field(j, "ego", "");
    const json& pose = field(ego, "init_pose", "/ego");
    s.ego_init.p = vec(field(pose, "p", "/ego/init_pose"), "/ego/init_pose/p");
    s.ego_init.heading = number<double>(pose, "heading", "/ego/init_pose");
    s.ego_dest = vec(field(ego, "dest", "/ego"), "/ego/dest");
    if (ego.contains("size")) s.ego_size = size_from_json(ego["size"], "/ego/size");

    if (j.contains("objects")) {
      const json& objs = j["objects"];
      for (std::size_t i = 0; i < objs.size(); ++i) {
        const std::string path = "/objects/" + std::to_string(i);
        const json& oj = objs[i];
        TrafficObject o;
        o.id = number<int>(oj, "id", path);
        o.kind = object_kind_from_string(field(oj, "kind", path).get<std::string>());
        o.size = size_from_json(field(oj, "size", path), path + "/size");
        const json& wps = field(oj, "waypoints", path);
        for (std::size_t k = 0; k < wps.size(); ++k) {
          const std::string wpath = path + "/waypoints/" + std::to_string(k);
          Waypoint w;
          w.t = number<SimTime>(wps[k], "t_ms", wpath);
          w.p = vec(field(wps[k], "p", wpath), wpath + "/p");
          w.v = wps[k].contains("v") ? vec(wps[k]["v"], wpath + "/v") : Vec2{};
          w.a = wps[k].contains("a") ? vec(wps[k]["a"], wpath + "/a") : Vec2{};
          o.waypoints.push_back(w);
        }
        if (oj.contains("heading_override")) o.heading_override = oj["heading_override"].get<double>();
        s.objects.push_back(std::move(o));
      }
    }

    if (j.contains("signals")) {
      const json& sigs = j["signals"];
      for (std::size_t i = 0; i < sigs.size(); ++i) {
        const std::string path = "/signals/" + std::to_string(i);
        TrafficSignal sig;
        sig.id = number<int>(sigs[i], "id", path);
        sig.stop_line = vec(field(sigs[i], "stop_line", path), path + "/stop_line");
        const json& phases = field(sigs[i], "phases", path);
        for (std::size_t k = 0; k < phases.size(); ++k) {
          const std::string ppath = path + "/phases/" + std::to_string(k);
          SignalPhase ph;
          ph.start = number<SimTime>(phases[k], "start_ms", ppath);
          ph.end = number<SimTime>(phases[k], "end_ms", ppath);
          const auto color = field(phases[k], "color", ppath).get<std::string>();
          if (color == "Red") ph.color = SignalColor::Red;
          else if (color == "Yellow") ph.color = SignalColor::Yellow;
          else if (color == "Green") ph.color = SignalColor::Green;
          else throw ValidationError(ppath + "/color", "unknown color '" + color + "'");
          sig.phases.push_back(ph);
        }
        s.signals.push_back(std::move(sig));
      }
    }

    s.t_max = number<SimTime>(j, "t_max_ms", "");
    s.seed = field(j, "seed", "").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
  validate(s);
  return s;
}

ordered_json scenario_to_json(const Scenario& s) {
  using json_util::vec;
  ordered_json j;
  j["name"] = s.name;
  ordered_json lanes = ordered_json::array();
  for (const auto& l : s.map.lanes) {
    ordered_json lj;
    lj["id"] = l.id;
    lj["centerline"] = ordered_json::array();
    for (const auto& p : l.centerline) lj["centerline"].push_back(vec(p));
    lj["width"] = l.width;
    lj["speed_limit"] = l.speed_limit;
    lj["successors"] = l.successors;
    lanes.push_back(std::move(lj));
  }
  j["map"]["lanes"] = std::move(lanes);
  j["ego"]["init_pose"]["p"] = vec(s.ego_init.p);
  j["ego"]["init_pose"]["heading"] = s.ego_init.heading;
  j["ego"]["dest"] = vec(s.ego_dest);
  j["ego"]["size"] = size_to_json(s.ego_size);
  ordered_json objs = ordered_json::array();
  for (const auto& o : s.objects) {
    ordered_json oj;
    oj["id"] = o.id;
    oj["kind"] = to_string(o.kind);
    oj["size"] = size_to_json(o.size);
    oj["waypoints"] = ordered_json::array();
    for (const auto& w : o.waypoints) {
      ordered_json wj;
      wj["t_ms"] = w.t;
      wj["p"] = vec(w.p);
      wj["v"] = vec(w.v);
      wj["a"] = vec(w.a);
      oj["waypoints"].push_back(std::move(wj));
    }
    if (o.heading_override) oj["heading_override"] = *o.heading_override;
    objs.push_back(std::move(oj));
  }
  j["objects"] = std::move(objs);
  ordered_json sigs = ordered_json::array();
  for (const auto& sig : s.signals) {
    ordered_json sj;
    sj["id"] = sig.id;
    sj["stop_line"] = vec(sig.stop_line);
    sj["phases"] = ordered_json::array();
    for (const auto& ph : sig.phases) {
      sj["phases"].push_back({{"start_ms", ph.start}, {"end_ms", ph.end}, {"color", to_string(ph.color)}});
    }
    sigs.push_back(std::move(sj));
  }
  j["signals"] = std::move(sigs);
  j["t_max_ms"] = s.t_max;
  j["seed"] = s.seed;
  return j;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  Scenario s = scenario_from_json(j);
  if (s.name.empty()) s.name = path.stem().string();
  return s;
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << scenario_to_json(s).dump(2) << '\n';
}

void validate(const Scenario& s) {
  if (s.t_max <= 0) throw ValidationError("/t_max_ms", "must be positive");
  std::set<int> lane_ids;
  for (std::size_t i = 0; i < s.map.lanes.size(); ++i) {
    const auto& l = s.map.lanes[i];
    const std::string path = "/map/lanes/" + std::to_string(i);
    if (!lane_ids.insert(l.id).second) throw ValidationError(path + "/id", "duplicate lane id");
    if (l.centerline.size() < 2) throw ValidationError(path + "/centerline", "needs at least 2 points");
    for (const auto& p : l.centerline) {
      if (!p.finite()) throw ValidationError(path + "/centerline", "non-finite coordinate");
    }
    if (!(l.width > 0)) throw ValidationError(path + "/width", "must be positive");
    if (!(l.speed_limit > 0)) throw ValidationError(path + "/speed_limit", "must be positive");
  }
  for (std::size_t i = 0; i < s.map.lanes.size(); ++i) {
    for (int succ : s.map.lanes[i].successors) {
      if (!lane_ids.count(succ)) {
        throw ValidationError("/map/lanes/" + std::to_string(i) + "/successors", "unknown lane " + std::to_string(succ));
      }
    }
  }

  if (!s.ego_init.p.finite() || !std::isfinite(s.ego_init.heading)) {
    throw ValidationError("/ego/init_pose", "non-finite pose");
  }
  if (!(s.ego_size.length > 0 && s.ego_size.width > 0 && s.ego_size.height > 0)) {
    throw ValidationError("/ego/size", "size components must be positive");
  }
  const auto init_lane = lane_at(s.map, s.ego_init.p);
  if (!init_lane) throw ValidationError("/ego/init_pose/p", "not on any lane");
  const auto dest_lane = lane_at(s.map, s.ego_dest);
  if (!dest_lane) throw ValidationError("/ego/dest", "not on any lane");
  if (!s.map.reachable(init_lane->lane->id, dest_lane->lane->id)) {
    throw ValidationError("/ego/dest", "not reachable from the initial lane");
  }

  std::set<int> object_ids;
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    const auto& o = s.objects[i];
    const std::string path = "/objects/" + std::to_string(i);
    if (!object_ids.insert(o.id).second) throw ValidationError(path + "/id", "duplicate object id");
    if (!(o.size.length > 0 && o.size.width > 0 && o.size.height > 0)) {
      throw ValidationError(path + "/size", "size components must be positive");
    }
    if (o.waypoints.empty()) throw ValidationError(path + "/waypoints", "must not be empty");
    for (std::size_t k = 0; k < o.waypoints.size(); ++k) {
      const auto& w = o.waypoints[k];
      const std::string wpath = path + "/waypoints/" + std::to_string(k);
      if (w.t < 0) throw ValidationError(wpath + "/t_ms", "must be non-negative");
      if (!finite(w)) throw ValidationError(wpath, "non-finite component");
      if (k > 0 && w.t <= o.waypoints[k - 1].t) throw ValidationError(wpath + "/t_ms", "not strictly increasing");
    }
    if (o.kind == ObjectKind::StaticObstacle || o.kind == ObjectKind::Infrastructure) {
      for (std::size_t k = 0; k < o.waypoints.size(); ++k) {
        const auto& w = o.waypoints[k];
        const std::string wpath = path + "/waypoints/" + std::to_string(k);
        if (!(w.p == o.waypoints.front().p)) throw ValidationError(wpath + "/p", "static object must not move");
        if (!(w.v == Vec2{}) || !(w.a == Vec2{})) {
          throw ValidationError(wpath, "static object must have zero velocity and acceleration");
        }
      }
    }
  }

  for (std::size_t i = 0; i < s.signals.size(); ++i) {
    const auto& sig = s.signals[i];
    const std::string path = "/signals/" + std::to_string(i) + "/phases";
    SimTime cursor = 0;
    for (std::size_t k = 0; k < sig.phases.size(); ++k) {
      const auto& ph = sig.phases[k];
      if (ph.start != cursor) throw ValidationError(path + "/" + std::to_string(k), "phases must be contiguous from 0");
      if (ph.end <= ph.start) throw ValidationError(path + "/" + std::to_string(k), "empty phase");
      cursor = ph.end;
    }
    if (cursor < s.t_max) throw ValidationError(path, "phases do not cover [0, t_max)");
  }
}

}  // namespace dvca
