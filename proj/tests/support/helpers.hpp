#pragma once

#include <filesystem>
#include <string>

#include "dvca/scenario.hpp"

namespace dvca::testing {

inline std::filesystem::path data_dir() { return DVCA_DATA_DIR; }
inline std::filesystem::path scenario_path(const std::string& name) { return data_dir() / "scenarios" / (name + ".json"); }
inline std::filesystem::path bench_dir() { return data_dir() / "bench"; }

/// One straight 250 m lane along +x with the ego at x=10 heading for x=210.
inline Scenario straight_road(double dest_x = 210.0, SimTime t_max = 60000) {
  Scenario s;
  s.name = "straight";
  Lane lane;
  lane.id = 1;
  lane.centerline = {{0.0, 0.0}, {250.0, 0.0}};
  lane.width = 3.5;
  lane.speed_limit = 11.0;
  s.map.lanes.push_back(lane);
  s.ego_init = {{10.0, 0.0}, 0.0};
  s.ego_dest = {dest_x, 0.0};
  s.t_max = t_max;
  return s;
}

inline TrafficObject static_object(int id, Vec2 p, Size3 size, ObjectKind kind = ObjectKind::StaticObstacle) {
  TrafficObject o;
  o.id = id;
  o.kind = kind;
  o.size = size;
  o.waypoints.push_back({p, {}, {}, 0});
  return o;
}

inline TrafficObject moving_object(int id, Vec2 p0, Vec2 v, SimTime t_end, Size3 size,
                                   ObjectKind kind = ObjectKind::Vehicle) {
  TrafficObject o;
  o.id = id;
  o.kind = kind;
  o.size = size;
  o.waypoints.push_back({p0, v, {}, 0});
  o.waypoints.push_back({p0 + v * to_seconds(t_end), v, {}, t_end});
  return o;
}

}  // namespace dvca::testing
