#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dvca/messages.hpp"
#include "dvca/verdict.hpp"
#include "dvca/world.hpp"

namespace dvca {

/// The recorded execution of one run: one message row per component (the
/// execution matrix), the execution records, and the ego waypoint log.
struct Trace {
  std::string scenario_name;
  std::array<std::vector<Message>, kComponentCount> rows;
  std::vector<ExecutionRecord> executions;
  std::vector<EgoState> ego_log;
  Verdict verdict;
  bool collided = false;
  std::vector<std::string> diagnostics;

  const std::vector<Message>& row(ComponentId c) const { return rows[index(c)]; }
  std::vector<Message>& row(ComponentId c) { return rows[index(c)]; }
  std::size_t message_count() const;
  const Message& message(ComponentId c, std::uint32_t seq) const;
  /// Ego log entry in effect at time t (latest sample with time <= t).
  const EgoState& ego_at(SimTime t) const;
  /// All messages ordered by (t_pub, scheduling priority).
  std::vector<const Message*> publish_order() const;
};

/// Messages of `component` with seq >= i. Valid for 1 <= i <= row length + 1.
std::vector<const Message*> trace_suffix(const Trace& trace, ComponentId component, std::uint32_t i);

/// Publish/subscribe bus. Every publish is appended to the trace it writes to;
/// subscribers read the latest message of each topic.
class Bus {
 public:
  explicit Bus(Trace& trace) : trace_(trace) {}

  const Message& publish(ComponentId component, Payload payload, SimTime t, bool fault_affected = false,
                         bool substituted = false);
  const Message* latest(ComponentId component) const;
  /// Up to `k` most recent messages of a topic, oldest first.
  std::vector<const Message*> history(ComponentId component, std::size_t k) const;
  void record_execution(ComponentId component, std::span<const ComponentId> inputs, const Message& output);

 private:
  Trace& trace_;
};

nlohmann::ordered_json payload_to_json(const Payload& p);
Payload payload_from_json(ComponentId c, const nlohmann::json& j);

/// JSON-lines serialization: a header line carrying the scenario, one line per
/// message in publish order, one line per ego sample, and a verdict line.
void write_trace(std::ostream& out, const Trace& trace, const Scenario& scenario);
std::string serialize_trace(const Trace& trace, const Scenario& scenario);
void save_trace(const std::filesystem::path& path, const Trace& trace, const Scenario& scenario);

struct LoadedTrace {
  Trace trace;
  Scenario scenario;
};
LoadedTrace load_trace(const std::filesystem::path& path);
LoadedTrace parse_trace(std::istream& in);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view data);
std::string trace_digest(const Trace& trace, const Scenario& scenario);

nlohmann::ordered_json verdict_to_json(const Verdict& v);
Verdict verdict_from_json(const nlohmann::json& j);

}  // namespace dvca
