#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dvca/geometry.hpp"

namespace dvca {

/// Simulation time in integer milliseconds.
using SimTime = std::int64_t;

inline constexpr double kMsPerSecond = 1000.0;
inline double to_seconds(SimTime t) { return static_cast<double>(t) / kMsPerSecond; }

struct Waypoint {
  Vec2 p;
  Vec2 v;
  Vec2 a;
  SimTime t = 0;
};

enum class ObjectKind { Pedestrian, Vehicle, StaticObstacle, Infrastructure };

std::string_view to_string(ObjectKind k);
ObjectKind object_kind_from_string(std::string_view s);

struct Size3 {
  double length = 0.0;
  double width = 0.0;
  double height = 0.0;
};

struct TrafficObject {
  int id = 0;
  ObjectKind kind = ObjectKind::StaticObstacle;
  Size3 size;
  std::vector<Waypoint> waypoints;
  std::optional<double> heading_override;
};

struct Lane {
  int id = 0;
  std::vector<Vec2> centerline;
  double width = 3.5;
  double speed_limit = 11.0;
  std::vector<int> successors;
};

struct LaneMap {
  std::vector<Lane> lanes;

  const Lane* find(int id) const;
  /// Lanes reachable from `from` through successor links, including itself.
  bool reachable(int from, int to) const;
};

enum class SignalColor { Red, Yellow, Green };

std::string_view to_string(SignalColor c);

struct SignalPhase {
  SimTime start = 0;
  SimTime end = 0;  // exclusive
  SignalColor color = SignalColor::Green;
};

struct TrafficSignal {
  int id = 0;
  Vec2 stop_line;
  std::vector<SignalPhase> phases;

  SignalColor color_at(SimTime t) const;
};

struct Pose {
  Vec2 p;
  double heading = 0.0;
};

struct Scenario {
  std::string name;
  LaneMap map;
  Pose ego_init;
  Vec2 ego_dest;
  Size3 ego_size{4.0, 2.0, 1.5};
  std::vector<TrafficObject> objects;
  std::vector<TrafficSignal> signals;
  SimTime t_max = 0;
  std::uint64_t seed = 0;

  const TrafficObject* find_object(int id) const;
};

struct ObjectKinematics {
  Vec2 p;
  Vec2 v;
  Vec2 a;
};

/// Interpolated kinematics of a scripted object. Position and velocity are
/// linear between bracketing waypoints, acceleration is taken from the earlier
/// waypoint, and queries outside the scripted range clamp to the end points.
ObjectKinematics object_pose_at(const TrafficObject& obj, SimTime t);

double object_heading_at(const TrafficObject& obj, SimTime t);
OrientedBox bbox_at(const TrafficObject& obj, SimTime t);
OrientedBox make_box(Vec2 center, double heading, const Size3& size);

struct LaneHit {
  const Lane* lane = nullptr;
  double s = 0.0;        // longitudinal offset along the centerline
  double lateral = 0.0;  // signed, positive to the left
};

/// Nearest lane whose centerline lies within half a lane width of `p`; ties
/// go to the lane with the smaller id.
std::optional<LaneHit> lane_at(const LaneMap& map, Vec2 p);

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::ordered_json scenario_to_json(const Scenario& s);
Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

/// Throws ValidationError naming the first violated field.
void validate(const Scenario& s);

}  // namespace dvca
