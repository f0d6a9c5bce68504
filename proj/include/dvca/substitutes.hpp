#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "dvca/messages.hpp"
#include "dvca/pipeline.hpp"
#include "dvca/trace.hpp"
#include "dvca/world.hpp"

namespace dvca {

struct QuantUnits {
  double p = 0.2;  // m
  double v = 0.1;  // m/s
  double a = 0.1;  // m/s^2
};

StateKey quantize(const EgoState& ego, const QuantUnits& units);

PerceptionOut ideal_perception(const Scenario& scenario, SimTime t, Vec2 origin, double range);
PredictionOut ideal_prediction(const Scenario& scenario, SimTime t, Vec2 origin, double range, SimTime horizon = 3000,
                               SimTime step = 100);
LocalizationOut ideal_localization(const EgoState& truth);

/// Ego state on the planned trajectory at time t. An empty plan yields a
/// stationary state at `hold`.
EgoState sim_control_apply(const PlanningOut& plan, SimTime t, const EgoState& hold = {});

/// One vehicle dynamic state: a maximal run of consecutive messages sharing a
/// quantized key. Repeated visits of a key are told apart by `ordinal`.
struct StateInfo {
  StateKey key;
  std::uint32_t ordinal = 0;
  SimTime t_first = 0;  // publish time of the first message in the state
  SimTime t_end = 0;    // publish time of the first message of the next state
};

struct TraceStates {
  std::vector<StateInfo> states;
  /// 0-based state index of every message, per component row.
  std::array<std::vector<std::uint32_t>, kComponentCount> assignment;

  std::size_t size() const { return states.size(); }
  /// Seqs of the component's messages assigned to state `s` (0-based).
  std::vector<std::uint32_t> messages_in(ComponentId c, std::size_t s) const;
};

TraceStates split_trace(const Trace& trace, const QuantUnits& units = {});
/// Same as above and also stores each message's key in the trace.
TraceStates split_trace(Trace& trace, const QuantUnits& units = {});

/// Index in `states` of the exact (key, ordinal) match, else of the nearest key
/// by weighted L1 distance (earliest on ties).
std::size_t match_state(const StateInfo& target, std::span<const StateInfo> states);
double state_distance(const StateKey& a, const StateKey& b);

/// Online counterpart of split_trace used during a run.
class StateTracker {
 public:
  explicit StateTracker(QuantUnits units = {}) : units_(units) {}
  void observe(const EgoState& ego);
  bool started() const { return started_; }
  const StateKey& key() const { return key_; }
  std::uint32_t ordinal() const { return ordinal_; }

 private:
  QuantUnits units_;
  bool started_ = false;
  StateKey key_;
  std::uint32_t ordinal_ = 0;
  std::map<StateKey, std::uint32_t> counts_;
};

enum class SubstMode { Original, IdealAll, IdealFromState, IdealWithinStates };

struct ComponentSubst {
  SubstMode mode = SubstMode::Original;
  /// Target state for IdealFromState / start of IdealWithinStates.
  StateInfo from;
  /// IdealWithinStates switches back to the original logic at this time.
  SimTime until = 0;
};

struct SubstitutionPlan {
  std::array<ComponentSubst, kComponentCount> modes{};

  ComponentSubst& operator[](ComponentId c) { return modes[index(c)]; }
  const ComponentSubst& operator[](ComponentId c) const { return modes[index(c)]; }

  static SubstitutionPlan original() { return {}; }
  static SubstitutionPlan ideal(std::span<const ComponentId> components);
  static SubstitutionPlan from_state(ComponentId c, const StateInfo& s);
  static SubstitutionPlan within_states(ComponentId c, const StateInfo& first, const StateInfo& last);

  /// Throws ValidationError if Planning is not Original.
  void validate() const;
};

nlohmann::ordered_json plan_to_json(const SubstitutionPlan& plan);

/// Activation of substitutes during one run.
class SubstitutionState {
 public:
  SubstitutionState(const SubstitutionPlan& plan, QuantUnits units) : plan_(plan), tracker_(units) {}
  void observe(const EgoState& ego) { tracker_.observe(ego); }
  /// Whether component `c` publishes ideal output at time t.
  bool ideal(ComponentId c, SimTime t);

 private:
  SubstitutionPlan plan_;
  StateTracker tracker_;
  std::array<bool, kComponentCount> activated_{};
};

/// Planning substitute kept from an earlier design: searches a time-expanded
/// lattice over the lane corridor for a collision-free trajectory towards the
/// goal using ground-truth object futures. Never used by the attribution.
struct BestEffortResult {
  PlanningOut plan;
  bool feasible = false;
};
BestEffortResult best_effort_planning(const Scenario& scenario, const EgoState& ego, SimTime t,
                                      const PlannerParams& params = {}, const VehicleLimits& limits = {});

}  // namespace dvca
