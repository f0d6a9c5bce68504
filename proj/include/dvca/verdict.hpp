#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dvca/scenario.hpp"

namespace dvca {

enum class ViolationKind { SafeDistance, Speeding, Mission };

std::string_view to_string(ViolationKind k);
ViolationKind violation_kind_from_string(std::string_view s);

struct Violation {
  ViolationKind kind = ViolationKind::SafeDistance;
  SimTime t = 0;
  std::string detail;
};

struct Verdict {
  bool passed = true;
  std::vector<Violation> violations;

  bool has(ViolationKind k) const;
};

struct OracleConfig {
  std::set<ViolationKind> enabled{ViolationKind::SafeDistance, ViolationKind::Speeding, ViolationKind::Mission};
  double safe_distance = 0.3;      // c, meters
  double dest_tolerance = 2.0;     // meters
  double speed_tolerance = 0.5;    // m/s
  double stall_lookahead = 30.0;   // meters of lane corridor checked for blockers
  SimTime stall_persistence = 3000;
};

}  // namespace dvca
