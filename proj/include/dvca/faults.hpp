#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dvca/messages.hpp"

namespace dvca {

enum class FaultKind {
  MissDetection,
  WrongBBox,
  WrongLongitudinalDist,
  WrongLateralDist,
  WrongVelocity,
  NoPredictionTrajectory,
  WrongPredictionTrajectory,
  IncorrectPathPlanning,
  IncorrectSpeedPlanning,
  NoPlanningTrajectory,
  WrongLongitudinalCommand,
  WrongLateralCommand,
  WrongLateralLocalization,
};

std::string_view to_string(FaultKind k);
FaultKind fault_kind_from_string(std::string_view s);
/// The component a fault kind can be injected into.
ComponentId target_of(FaultKind k);

struct Region {
  Vec2 center;
  double radius = 0.0;
};

struct FaultTrigger {
  SimTime t0 = 0;
  SimTime t1 = std::numeric_limits<SimTime>::max();  // exclusive
  std::optional<int> object_id;
  /// Fault fires only while the (true) ego position is inside the region.
  std::optional<Region> region;

  bool active(SimTime t, Vec2 ego_p) const;
  bool matches_object(int id) const { return !object_id || *object_id == id; }
};

/// Kind-specific parameters; unused fields keep their defaults.
///  - value: offset in meters (distances, lateral bias, localization),
///           m/s (velocity, speed bias), m/s^2 (longitudinal command) or
///           rad (lateral command)
///  - velocity: replacement object velocity for WrongPredictionTrajectory
///  - length_scale / width_scale: WrongBBox size factors
struct FaultMagnitude {
  double value = 0.0;
  Vec2 velocity;
  double length_scale = 1.0;
  double width_scale = 1.0;
};

struct FaultSpec {
  ComponentId target = ComponentId::Perception;
  FaultKind kind = FaultKind::MissDetection;
  FaultTrigger trigger;
  FaultMagnitude magnitude;
  std::string note;
};

FaultSpec fault_from_json(const nlohmann::json& j, const std::string& path = "");
nlohmann::ordered_json fault_to_json(const FaultSpec& f);

/// Accepts {"faults": [...]}, a bare array, or a single fault object.
std::vector<FaultSpec> faults_from_json(const nlohmann::json& j);
std::vector<FaultSpec> load_faults(const std::filesystem::path& path);

}  // namespace dvca
