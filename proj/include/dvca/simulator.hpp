#pragma once

#include "dvca/oracles.hpp"
#include "dvca/pipeline.hpp"
#include "dvca/substitutes.hpp"
#include "dvca/trace.hpp"

namespace dvca {

struct RunHooks {
  SubstitutionPlan plan;
  QuantUnits units;
};

/// Advances the world in 1 ms ticks until t_max or the first contact. Due
/// components fire in fixed priority order; the ego log is sampled every 10 ms.
Trace run_scheduler(const Scenario& scenario, const AdsConfig& config, const RunHooks& hooks = {});

struct RunResult {
  Verdict verdict;
  Trace trace;
};

RunResult rtest(const Scenario& scenario, const AdsConfig& config, const OracleConfig& oracle);

Verdict dtest(const Scenario& scenario, const AdsConfig& config, const SubstitutionPlan& plan,
              const OracleConfig& oracle, const QuantUnits& units = {});

inline constexpr SimTime kEgoSamplePeriod = 10;

}  // namespace dvca
