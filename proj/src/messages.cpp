#include "dvca/messages.hpp"

#include "dvca/errors.hpp"
#include "dvca/verdict.hpp"

namespace dvca {

std::string_view to_string(ComponentId c) {
  switch (c) {
    case ComponentId::Perception: return "Perception";
    case ComponentId::Prediction: return "Prediction";
    case ComponentId::Planning: return "Planning";
    case ComponentId::Control: return "Control";
    case ComponentId::Localization: return "Localization";
  }
  return "?";
}

ComponentId component_from_string(std::string_view s) {
  for (ComponentId c : kAllComponents) {
    if (to_string(c) == s) return c;
  }
  throw ParseError("unknown component '" + std::string(s) + "'");
}

std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::Cruise: return "Cruise";
    case Decision::Stop: return "Stop";
    case Decision::Nudge: return "Nudge";
    case Decision::Emergency: return "Emergency";
  }
  return "?";
}

const PredictedTrajectory* PredictionOut::find(int id) const {
  for (const auto& tr : trajectories) {
    if (tr.id == id) return &tr;
  }
  return nullptr;
}

std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::SafeDistance: return "SafeDistance";
    case ViolationKind::Speeding: return "Speeding";
    case ViolationKind::Mission: return "Mission";
  }
  return "?";
}

ViolationKind violation_kind_from_string(std::string_view s) {
  for (auto k : {ViolationKind::SafeDistance, ViolationKind::Speeding, ViolationKind::Mission}) {
    if (to_string(k) == s) return k;
  }
  throw ParseError("unknown violation kind '" + std::string(s) + "'");
}

bool Verdict::has(ViolationKind k) const {
  for (const auto& v : violations) {
    if (v.kind == k) return true;
  }
  return false;
}

}  // namespace dvca
