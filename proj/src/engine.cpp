#include "dvca/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <future>
#include <set>
#include <sstream>

namespace dvca {

bool Prober::passes(const SubstitutionPlan& plan) {
  ++calls_;
  return dtest(scenario_, config_, plan, oracle_, units_).passed;
}

namespace {

std::string combined_label() {
  std::string s;
  for (auto c : kSubstitutable) {
    if (!s.empty()) s += '+';
    s += to_string(c);
  }
  return s;
}

MessageRef ref_of(const Message& m) { return {m.component, m.seq, m.t_pub}; }

}  // namespace

ComponentAttribution attribute_component(Prober& prober, const Verdict& original, const ComponentOptions& options) {
  if (original.passed) throw NoViolation("the original run shows no violation");
  ComponentAttribution r;
  const bool combined = prober.passes(SubstitutionPlan::ideal(kSubstitutable));
  r.outcomes.push_back({combined_label(), combined});
  if (!combined) {
    r.component = ComponentId::Planning;
    return r;
  }

  std::optional<ComponentId> found;
  auto single = [&](ComponentId c) {
    const std::array<ComponentId, 1> one{c};
    return prober.passes(SubstitutionPlan::ideal(one));
  };
  if (options.concurrent) {
    std::vector<std::future<bool>> pending;
    for (auto c : kSubstitutable) pending.push_back(std::async(std::launch::async, single, c));
    for (std::size_t i = 0; i < kSubstitutable.size(); ++i) {
      const bool ok = pending[i].get();
      r.outcomes.push_back({std::string(to_string(kSubstitutable[i])), ok});
      if (!ok) continue;
      if (found) {
        r.also_flipping.push_back(kSubstitutable[i]);
      } else {
        found = kSubstitutable[i];
      }
    }
  } else {
    for (auto c : kSubstitutable) {
      const bool ok = single(c);
      r.outcomes.push_back({std::string(to_string(c)), ok});
      if (!ok) continue;
      if (found) {
        r.also_flipping.push_back(c);
        continue;
      }
      found = c;
      if (!options.check_uniqueness) break;
    }
  }
  if (!found) throw Unattributable("no single component substitution removes the violation", r.outcomes);
  r.component = *found;
  return r;
}

MessageRef last_message_up_to_state(const Trace& trace, const TraceStates& states, ComponentId c, std::size_t s) {
  const auto& row = trace.row(c);
  if (row.empty()) throw IndexError(std::string(to_string(c)) + " published no messages");
  const auto& a = states.assignment[index(c)];
  for (std::size_t i = a.size(); i-- > 0;) {
    if (a[i] <= s) return ref_of(row[i]);
  }
  return ref_of(row.front());
}

SearchResult attribute_message_nonplanning(Prober& prober, const Trace& trace, const TraceStates& states,
                                           ComponentId c) {
  if (c == ComponentId::Planning) throw ValidationError("/component", "planning has no idealized substitute");
  const std::size_t n = states.size();
  if (n == 0) throw IndexError("trace has no states");
  const std::size_t before = prober.calls();
  auto probe = [&](std::size_t i) { return prober.passes(SubstitutionPlan::from_state(c, states.states[i])); };

  if (!probe(0)) {
    throw MonotonicityViolation("substituting " + std::string(to_string(c)) +
                                " from the first state does not remove the violation");
  }
  std::size_t left = 0;
  if (n > 1) {
    std::size_t right = n - 1;
    if (probe(right)) {
      left = right;
    } else {
      while (right - left > 1) {
        const std::size_t mid = left + (right - left) / 2;
        if (probe(mid)) {
          left = mid;
        } else {
          right = mid;
        }
      }
    }
  }
  SearchResult r;
  r.state = left;
  r.focus = last_message_up_to_state(trace, states, c, left);
  r.dtests = prober.calls() - before;
  return r;
}

AuditResult audit_monotonicity(Prober& prober, const Trace& trace, const TraceStates& states, ComponentId c) {
  const auto& row = trace.row(c);
  const std::size_t before = prober.calls();
  std::map<std::size_t, bool> by_activation;
  AuditResult r;
  r.passed.reserve(states.size());
  for (const StateInfo& s : states.states) {
    const auto it = std::lower_bound(row.begin(), row.end(), s.t_first,
                                     [](const Message& m, SimTime t) { return m.t_pub < t; });
    const auto first = static_cast<std::size_t>(it - row.begin());
    bool ok = false;
    if (first < row.size()) {
      auto memo = by_activation.find(first);
      if (memo == by_activation.end()) {
        memo = by_activation.emplace(first, prober.passes(SubstitutionPlan::from_state(c, s))).first;
      }
      ok = memo->second;
    }
    r.passed.push_back(ok);
  }
  bool seen_fail = false;
  for (std::size_t i = 0; i < r.passed.size(); ++i) {
    if (r.passed[i]) {
      if (seen_fail) r.monotone = false;
      r.last_passing = i;
    } else {
      seen_fail = true;
    }
  }
  r.dtests = prober.calls() - before;
  return r;
}

MessageRef attribute_message_planning(const Trace& trace, const Scenario& scenario, const OracleConfig& oracle) {
  const auto& row = trace.row(ComponentId::Planning);
  PlanningCheckContext ctx;
  ctx.scenario = &scenario;
  ctx.config = oracle;
  for (std::size_t i = 0; i < row.size(); ++i) {
    ctx.ego = trace.ego_at(row[i].t_pub);
    ctx.planning_row = std::span<const Message>(row.data(), i + 1);
    if (planning_message_violates(i, ctx)) return ref_of(row[i]);
  }
  throw NoViolatingPlanningMessage("none of the " + std::to_string(row.size()) +
                                   " planning messages violates a driving specification");
}

IntervalResult attribute_interval_dd(std::size_t n, const IntervalTest& test) {
  if (n == 0) throw IndexError("no states to search");
  IntervalResult r;
  auto run = [&](std::size_t a, std::size_t b) {
    const bool ok = test(a, b);
    r.tested.emplace_back(a, b);
    r.outcomes.push_back(ok);
    return ok;
  };
  std::size_t start = 1, end = n, step = n / 2;
  while (step > 0 && start < end) {
    if (run(start, start + step - 1)) {
      end = start + step - 1;
      step /= 2;
    } else if (run(end - step + 1, end)) {
      start = end - step + 1;
      step /= 2;
    } else if (start + step <= end && run(start + step, end)) {
      const std::size_t next = (end - start - step) / 2;
      start += step;
      step = next;
    } else if (start + step <= end && run(start, end - step)) {
      const std::size_t next = (end - start - step) / 2;
      end -= step;
      step = next;
    } else {
      step /= 2;
    }
  }
  r.first = start;
  r.last = end;
  return r;
}

IntervalResult attribute_interval_dd(Prober& prober, const TraceStates& states, ComponentId c) {
  if (c == ComponentId::Planning) throw ValidationError("/component", "planning has no idealized substitute");
  return attribute_interval_dd(states.size(), [&](std::size_t a, std::size_t b) {
    return prober.passes(SubstitutionPlan::within_states(c, states.states[a - 1], states.states[b - 1]));
  });
}

std::vector<Suspiciousness> tarantula_scores(const std::map<std::string, std::size_t>& passed,
                                             const std::map<std::string, std::size_t>& failed,
                                             std::size_t total_passed, std::size_t total_failed) {
  if (total_passed == 0 && total_failed == 0) throw DegenerateInput("tarantula: no passed or failed executions");
  std::set<std::string> blocks;
  for (const auto& [b, n] : passed) blocks.insert(b);
  for (const auto& [b, n] : failed) blocks.insert(b);
  auto ratio = [](const std::map<std::string, std::size_t>& m, const std::string& b, std::size_t total) {
    if (total == 0) return 0.0;
    const auto it = m.find(b);
    return it == m.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total);
  };
  std::vector<Suspiciousness> out;
  for (const auto& b : blocks) {
    const double f = ratio(failed, b, total_failed);
    const double p = ratio(passed, b, total_passed);
    out.push_back({b, f + p > 0.0 ? f / (f + p) : 0.0});
  }
  std::stable_sort(out.begin(), out.end(), [](const Suspiciousness& a, const Suspiciousness& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.block < b.block;
  });
  return out;
}

std::string_view to_string(Label l) {
  switch (l) {
    case Label::Pass:
      return "pass";
    case Label::Fail:
      return "fail";
    case Label::Unresolved:
      return "unresolved";
  }
  return "?";
}

std::size_t VerdictMatrix::count(Label l) const {
  std::size_t n = 0;
  for (const auto& row : rows) n += static_cast<std::size_t>(std::count(row.begin(), row.end(), l));
  return n;
}

VerdictMatrix build_verdict_matrix(const Trace& trace, const MessageRef& focus) {
  VerdictMatrix m;
  for (auto c : kAllComponents) {
    auto& row = m.rows[index(c)];
    row.assign(trace.row(c).size(), Label::Pass);
    if (c != focus.component) continue;
    if (focus.seq == 0 || focus.seq > row.size()) throw IndexError("focus message outside its row");
    row[focus.seq - 1] = Label::Fail;
    for (std::size_t i = focus.seq; i < row.size(); ++i) row[i] = Label::Unresolved;
  }
  return m;
}

std::string_view to_string(Strategy s) { return s == Strategy::Binary ? "binary" : "interval-dd"; }

Strategy strategy_from_string(std::string_view s) {
  if (s == "binary") return Strategy::Binary;
  if (s == "interval-dd") return Strategy::IntervalDD;
  throw ParseError("unknown strategy '" + std::string(s) + "'");
}

std::string_view to_string(AuditOutcome a) {
  switch (a) {
    case AuditOutcome::Skipped:
      return "skipped";
    case AuditOutcome::Pass:
      return "pass";
    case AuditOutcome::Fail:
      return "fail";
  }
  return "?";
}

double reduction_rate(std::size_t message_count) {
  if (message_count == 0) throw DegenerateInput("reduction rate of an empty trace");
  return 1.0 - 1.0 / static_cast<double>(message_count);
}

AttributionReport build_report(const Trace& trace, const TraceStates& states, ComponentId component,
                               const MessageRef& focus, std::optional<std::size_t> focus_state) {
  AttributionReport r;
  r.scenario_name = trace.scenario_name;
  r.component = component;
  r.focus = focus;
  r.focus_state = focus_state;
  r.state_count = states.size();
  r.matrix = build_verdict_matrix(trace, focus);
  r.message_count = trace.message_count();
  r.reduction_rate = reduction_rate(r.message_count);

  const auto& row = trace.row(component);
  r.focus_fault_affected = row[focus.seq - 1].fault_affected;
  r.message_hit = r.focus_fault_affected;
  if (!r.message_hit && component != ComponentId::Planning && focus_state) {
    for (auto seq : states.messages_in(component, *focus_state)) {
      if (row[seq - 1].fault_affected) r.message_hit = true;
    }
  }
  for (const auto& m : row) {
    if (!m.fault_affected) continue;
    const SimTime d = m.t_pub > focus.t_pub ? m.t_pub - focus.t_pub : focus.t_pub - m.t_pub;
    if (!r.fault_distance || d < *r.fault_distance) r.fault_distance = d;
  }

  if (component == ComponentId::Planning) {
    std::map<std::string, std::size_t> passed, failed;
    auto tally = [](std::map<std::string, std::size_t>& into, const Message& m) {
      const auto& cov = std::get<PlanningOut>(m.payload).coverage;
      for (const auto& b : std::set<std::string>(cov.begin(), cov.end())) ++into[b];
    };
    for (std::size_t i = 0; i + 1 < focus.seq; ++i) tally(passed, row[i]);
    tally(failed, row[focus.seq - 1]);
    r.suspiciousness = tarantula_scores(passed, failed, focus.seq - 1, 1);
  }
  return r;
}

AttributionReport attribute(const Scenario& scenario, const AdsConfig& config, const OracleConfig& oracle,
                            const AttributionOptions& options, Trace* original) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult orig = rtest(scenario, config, oracle);
  if (orig.verdict.passed) throw NoViolation("scenario '" + scenario.name + "' passes without intervention");

  Prober prober(scenario, config, oracle, options.units);
  const ComponentAttribution ca =
      attribute_component(prober, orig.verdict, {options.concurrent, options.check_uniqueness});
  const std::size_t component_calls = prober.calls();
  const TraceStates states = split_trace(orig.trace, options.units);
  const ComponentId c = ca.component;

  MessageRef focus;
  std::optional<std::size_t> focus_state;
  std::optional<std::pair<std::size_t, std::size_t>> interval;
  std::vector<std::string> notes;
  std::size_t audit_calls = 0;
  AuditOutcome audit = AuditOutcome::Skipped;

  if (c == ComponentId::Planning) {
    focus = attribute_message_planning(orig.trace, scenario, oracle);
    focus_state = states.assignment[index(c)][focus.seq - 1];
  } else if (options.strategy == Strategy::Binary) {
    const SearchResult sr = attribute_message_nonplanning(prober, orig.trace, states, c);
    focus = sr.focus;
    focus_state = sr.state;
  } else {
    const IntervalResult ir = attribute_interval_dd(prober, states, c);
    interval = std::pair{ir.first, ir.last};
    focus_state = ir.last - 1;
    focus = last_message_up_to_state(orig.trace, states, c, ir.last - 1);
  }
  const std::size_t message_calls = prober.calls() - component_calls;

  if (options.audit_monotonicity && c != ComponentId::Planning) {
    const AuditResult ar = audit_monotonicity(prober, orig.trace, states, c);
    audit_calls = ar.dtests;
    const bool agrees = options.strategy != Strategy::Binary || ar.last_passing == focus_state;
    audit = ar.monotone && agrees ? AuditOutcome::Pass : AuditOutcome::Fail;
    if (audit == AuditOutcome::Fail) {
      if (!ar.monotone) {
        notes.push_back("suffix substitution of " + std::string(to_string(c)) + " is not monotone");
      }
      notes.push_back("linear scan ends at state " +
                      (ar.last_passing ? std::to_string(*ar.last_passing + 1) : std::string("none")) +
                      ", the search at state " + std::to_string(*focus_state + 1));
    }
  }

  AttributionReport r = build_report(orig.trace, states, c, focus, focus_state);
  r.interval = interval;
  r.component_dtests = component_calls;
  r.message_dtests = message_calls;
  r.audit_dtests = audit_calls;
  r.simulations = 1 + prober.calls();
  r.audit = audit;
  r.component_outcomes = ca.outcomes;
  for (auto other : ca.also_flipping) {
    notes.push_back("substituting " + std::string(to_string(other)) + " alone also removes the violation");
  }
  for (const auto& v : orig.verdict.violations) {
    notes.push_back(std::string(to_string(v.kind)) + " at " + std::to_string(v.t) + " ms: " + v.detail);
  }
  r.notes = std::move(notes);
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (original != nullptr) *original = std::move(orig.trace);
  return r;
}

nlohmann::ordered_json report_to_json(const AttributionReport& r) {
  nlohmann::ordered_json j;
  j["scenario"] = r.scenario_name;
  j["component"] = to_string(r.component);
  j["focus"] = {{"component", to_string(r.focus.component)},
                {"seq", r.focus.seq},
                {"t_pub", r.focus.t_pub},
                {"fault_affected", r.focus_fault_affected}};
  if (r.focus_state) j["focus"]["state"] = *r.focus_state + 1;
  if (r.interval) j["interval"] = {r.interval->first, r.interval->second};
  j["state_count"] = r.state_count;
  j["message_count"] = r.message_count;
  j["reduction_rate"] = r.reduction_rate;
  j["dtest_invocations"] = {{"component_level", r.component_dtests},
                            {"message_level", r.message_dtests},
                            {"audit", r.audit_dtests}};
  j["simulations"] = r.simulations;
  j["wall_time_s"] = r.wall_time;
  j["monotonicity_audit"] = to_string(r.audit);
  auto& outcomes = j["component_outcomes"] = nlohmann::ordered_json::array();
  for (const auto& o : r.component_outcomes) outcomes.push_back({{"substituted", o.label}, {"passed", o.passed}});
  j["verdict_matrix"] = {{"fail", r.matrix.count(Label::Fail)},
                         {"unresolved", r.matrix.count(Label::Unresolved)},
                         {"pass", r.matrix.count(Label::Pass)}};
  j["message_hit"] = r.message_hit;
  if (r.fault_distance) j["fault_distance_ms"] = *r.fault_distance;
  if (!r.suspiciousness.empty()) {
    auto& s = j["suspiciousness"] = nlohmann::ordered_json::array();
    for (const auto& b : r.suspiciousness) s.push_back({{"block", b.block}, {"score", b.score}});
  }
  j["notes"] = r.notes;
  return j;
}

std::string verdict_matrix_csv(const Trace& trace, const VerdictMatrix& m) {
  std::ostringstream out;
  out << "component,seq,t_pub,label\n";
  for (const Message* msg : trace.publish_order()) {
    const auto& row = m.row(msg->component);
    if (msg->seq == 0 || msg->seq > row.size()) throw IndexError("verdict matrix does not match the trace");
    out << to_string(msg->component) << ',' << msg->seq << ',' << msg->t_pub << ',' << to_string(row[msg->seq - 1])
        << '\n';
  }
  return out.str();
}

}  // namespace dvca
