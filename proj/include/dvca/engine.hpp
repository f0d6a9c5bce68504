#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dvca/errors.hpp"
#include "dvca/simulator.hpp"

namespace dvca {

/// The original run shows no violation, so there is nothing to attribute.
class NoViolation : public Error {
 public:
  using Error::Error;
};

struct ProbeOutcome {
  std::string label;
  bool passed = false;
};

/// No single substitution flips the verdict. Carries every outcome observed.
class Unattributable : public Error {
 public:
  Unattributable(const std::string& what, std::vector<ProbeOutcome> outcomes)
      : Error(what), outcomes_(std::move(outcomes)) {}
  const std::vector<ProbeOutcome>& outcomes() const { return outcomes_; }

 private:
  std::vector<ProbeOutcome> outcomes_;
};

class MonotonicityViolation : public Error {
 public:
  using Error::Error;
};

class NoViolatingPlanningMessage : public Error {
 public:
  using Error::Error;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

/// Runs counterfactual re-runs of one scenario and counts them.
class Prober {
 public:
  Prober(const Scenario& scenario, const AdsConfig& config, const OracleConfig& oracle, QuantUnits units = {})
      : scenario_(scenario), config_(config), oracle_(oracle), units_(units) {}

  bool passes(const SubstitutionPlan& plan);
  std::size_t calls() const { return calls_; }

  const Scenario& scenario() const { return scenario_; }
  const AdsConfig& config() const { return config_; }
  const OracleConfig& oracle() const { return oracle_; }
  const QuantUnits& units() const { return units_; }

 private:
  const Scenario& scenario_;
  AdsConfig config_;
  OracleConfig oracle_;
  QuantUnits units_;
  std::atomic<std::size_t> calls_ = 0;
};

inline constexpr std::array<ComponentId, 4> kSubstitutable = {ComponentId::Perception, ComponentId::Prediction,
                                                              ComponentId::Control, ComponentId::Localization};

struct ComponentAttribution {
  ComponentId component = ComponentId::Planning;
  std::vector<ProbeOutcome> outcomes;
  /// Other single substitutions that also flip the verdict (uniqueness check only).
  std::vector<ComponentId> also_flipping;
};

struct ComponentOptions {
  /// Probe the four single substitutions concurrently.
  bool concurrent = false;
  /// Probe every single substitution even after the first flip.
  bool check_uniqueness = false;
};

/// The original verdict must be a failure; otherwise NoViolation is thrown.
ComponentAttribution attribute_component(Prober& prober, const Verdict& original, const ComponentOptions& options = {});

struct MessageRef {
  ComponentId component = ComponentId::Perception;
  std::uint32_t seq = 0;
  SimTime t_pub = 0;
};

struct SearchResult {
  MessageRef focus;
  std::size_t state = 0;  // 0-based index into the original states
  std::size_t dtests = 0;
};

/// Last message of `c` assigned to state `s` or, failing that, to any earlier
/// state. Falls back to the first message of the row.
MessageRef last_message_up_to_state(const Trace& trace, const TraceStates& states, ComponentId c, std::size_t s);

SearchResult attribute_message_nonplanning(Prober& prober, const Trace& trace, const TraceStates& states,
                                           ComponentId c);

struct AuditResult {
  bool monotone = true;
  /// Largest state index whose suffix substitution passes.
  std::optional<std::size_t> last_passing;
  /// Verdict per state index.
  std::vector<bool> passed;
  std::size_t dtests = 0;
};

/// Exhaustive scan over every state. States that activate the substitute on
/// the same message share one re-run.
AuditResult audit_monotonicity(Prober& prober, const Trace& trace, const TraceStates& states, ComponentId c);

MessageRef attribute_message_planning(const Trace& trace, const Scenario& scenario, const OracleConfig& oracle);

/// Verdict of a re-run with messages in states [a, b] (1-based) substituted.
using IntervalTest = std::function<bool(std::size_t a, std::size_t b)>;

struct IntervalResult {
  std::size_t first = 1;
  std::size_t last = 1;
  std::vector<std::pair<std::size_t, std::size_t>> tested;
  std::vector<bool> outcomes;
};

IntervalResult attribute_interval_dd(std::size_t n, const IntervalTest& test);
IntervalResult attribute_interval_dd(Prober& prober, const TraceStates& states, ComponentId c);

struct Suspiciousness {
  std::string block;
  double score = 0.0;
};

/// Ranked descending by score, ties broken by block id.
std::vector<Suspiciousness> tarantula_scores(const std::map<std::string, std::size_t>& passed,
                                             const std::map<std::string, std::size_t>& failed,
                                             std::size_t total_passed, std::size_t total_failed);

enum class Label : std::uint8_t { Pass, Fail, Unresolved };
std::string_view to_string(Label l);

struct VerdictMatrix {
  std::array<std::vector<Label>, kComponentCount> rows;

  const std::vector<Label>& row(ComponentId c) const { return rows[index(c)]; }
  std::size_t count(Label l) const;
};

VerdictMatrix build_verdict_matrix(const Trace& trace, const MessageRef& focus);

enum class Strategy { Binary, IntervalDD };
std::string_view to_string(Strategy s);
Strategy strategy_from_string(std::string_view s);

enum class AuditOutcome { Skipped, Pass, Fail };
std::string_view to_string(AuditOutcome a);

struct AttributionOptions {
  Strategy strategy = Strategy::Binary;
  bool audit_monotonicity = false;
  bool concurrent = false;
  bool check_uniqueness = false;
  QuantUnits units;
};

struct AttributionReport {
  std::string scenario_name;
  ComponentId component = ComponentId::Planning;
  MessageRef focus;
  bool focus_fault_affected = false;
  std::optional<std::size_t> focus_state;
  std::optional<std::pair<std::size_t, std::size_t>> interval;
  std::size_t state_count = 0;
  VerdictMatrix matrix;
  std::size_t message_count = 0;
  double reduction_rate = 0.0;
  std::size_t component_dtests = 0;
  std::size_t message_dtests = 0;
  std::size_t audit_dtests = 0;
  /// Every simulation run, the original one included.
  std::size_t simulations = 0;
  double wall_time = 0.0;
  AuditOutcome audit = AuditOutcome::Skipped;
  std::vector<ProbeOutcome> component_outcomes;
  std::vector<Suspiciousness> suspiciousness;
  /// Whether the focus lands on a fault-affected output: the focus itself or,
  /// for non-planning components, another message of its state.
  bool message_hit = false;
  /// Distance in ms from the focus to the nearest fault-affected message of the component.
  std::optional<SimTime> fault_distance;
  std::vector<std::string> notes;
};

double reduction_rate(std::size_t message_count);

/// Labels the matrix, computes the metrics and fills the planning coverage ranking.
AttributionReport build_report(const Trace& trace, const TraceStates& states, ComponentId component,
                               const MessageRef& focus, std::optional<std::size_t> focus_state);

/// Complete attribution: the original run, component level, then message
/// level. The original trace is stored in `original` when given.
AttributionReport attribute(const Scenario& scenario, const AdsConfig& config, const OracleConfig& oracle,
                            const AttributionOptions& options = {}, Trace* original = nullptr);

nlohmann::ordered_json report_to_json(const AttributionReport& r);
/// component,seq,t_pub,label
std::string verdict_matrix_csv(const Trace& trace, const VerdictMatrix& m);

}  // namespace dvca
