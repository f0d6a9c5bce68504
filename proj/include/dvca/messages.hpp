#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "dvca/geometry.hpp"
#include "dvca/scenario.hpp"

namespace dvca {

/// Variant order of the payload matches the enumerator values.
enum class ComponentId : std::uint8_t { Perception = 0, Prediction, Planning, Control, Localization };

inline constexpr std::size_t kComponentCount = 5;
inline constexpr std::array<ComponentId, kComponentCount> kAllComponents = {
    ComponentId::Perception, ComponentId::Prediction, ComponentId::Planning, ComponentId::Control,
    ComponentId::Localization};

/// Order in which components fire when several are due on the same tick.
inline constexpr std::array<ComponentId, kComponentCount> kSchedulePriority = {
    ComponentId::Localization, ComponentId::Perception, ComponentId::Prediction, ComponentId::Planning,
    ComponentId::Control};

std::string_view to_string(ComponentId c);
ComponentId component_from_string(std::string_view s);
inline constexpr std::size_t index(ComponentId c) { return static_cast<std::size_t>(c); }

struct PerceivedObject {
  int id = 0;
  ObjectKind kind = ObjectKind::StaticObstacle;
  OrientedBox box;
  /// Empty when the tracker has no velocity estimate; prediction then falls
  /// back to finite differences over its history.
  std::optional<Vec2> v;
};

struct PerceptionOut {
  std::vector<PerceivedObject> objects;
};

struct PredictedPoint {
  SimTime t = 0;
  Vec2 p;
};

struct PredictedTrajectory {
  int id = 0;
  std::vector<PredictedPoint> points;
};

struct PredictionOut {
  std::vector<PredictedTrajectory> trajectories;

  const PredictedTrajectory* find(int id) const;
};

enum class Decision { Cruise, Stop, Nudge, Emergency };
std::string_view to_string(Decision d);

struct TrajectoryPoint {
  SimTime t = 0;
  Vec2 p;
  double speed = 0.0;
  double heading = 0.0;
};

struct PlanningOut {
  std::vector<TrajectoryPoint> trajectory;
  Decision decision = Decision::Cruise;
  /// Decision-logic blocks visited while producing this output.
  std::vector<std::string> coverage;
};

struct ControlOut {
  double accel_cmd = 0.0;
  double steer = 0.0;
};

struct LocalizationOut {
  Vec2 p;
  double heading = 0.0;
  double speed = 0.0;
  double accel = 0.0;
};

using Payload = std::variant<PerceptionOut, PredictionOut, PlanningOut, ControlOut, LocalizationOut>;

/// Quantized ego dynamic state (position, velocity, acceleration).
struct StateKey {
  std::array<std::int64_t, 6> q{};
  auto operator<=>(const StateKey&) const = default;
};

struct Message {
  ComponentId component = ComponentId::Perception;
  std::uint32_t seq = 0;  // 1-based, dense per component
  SimTime t_pub = 0;
  Payload payload;
  /// True when an injected fault changed this output.
  bool fault_affected = false;
  /// True when the output came from an idealized substitute.
  bool substituted = false;
  std::optional<StateKey> state_key;
};

struct ExecutionRecord {
  ComponentId component = ComponentId::Perception;
  /// Latest message seq consumed from each input topic.
  std::vector<std::pair<ComponentId, std::uint32_t>> inputs;
  std::uint32_t output_seq = 0;
  SimTime t = 0;
};

}  // namespace dvca
