// Prints one line per acceptance criterion and exits nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "box_oracle.hpp"
#include "dvca/bench.hpp"
#include "dvca/engine.hpp"
#include "dvca/oracles.hpp"
#include "dvca/simulator.hpp"

using namespace dvca;
namespace fs = std::filesystem;

namespace {

const fs::path kData = DVCA_DATA_DIR;

struct Check {
  bool ok = true;
  std::string why;

  void require(bool cond, const std::string& msg) {
    if (!cond && ok) {
      ok = false;
      why = msg;
    }
  }
};

int failures = 0;

void report(const char* id, const char* title, const Check& c, const std::string& detail = "") {
  std::printf("%s %-4s %s", c.ok ? "PASS" : "FAIL", id, title);
  if (!c.ok) {
    std::printf(" (%s)", c.why.c_str());
  } else if (!detail.empty()) {
    std::printf(" (%s)", detail.c_str());
  }
  std::printf("\n");
  std::fflush(stdout);
  if (!c.ok) ++failures;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::size_t search_budget(std::size_t n) {
  return static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(n, 1))))) + 2;
}

bool is_non_monotone(const AttributionReport& r) {
  for (const auto& n : r.notes) {
    if (n.find("not monotone") != std::string::npos) return true;
  }
  return false;
}

}  // namespace

int main() {
  const auto instances = load_benchmark(kData / "bench" / "benchmark.json");
  BenchOptions opt;
  opt.parallel = std::max(1u, std::thread::hardware_concurrency());
  const auto t0 = std::chrono::steady_clock::now();
  const auto results = run_benchmark(instances, opt);
  const double bench_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  BenchOptions audited = opt;
  audited.attribution.audit_monotonicity = true;
  const auto audit_results = run_benchmark(instances, audited);

  // AC1
  {
    Check c;
    std::map<ComponentId, std::size_t> per;
    std::set<FaultKind> kinds;
    std::set<std::string> scenarios;
    std::size_t hits = 0;
    for (const auto& r : results) {
      ++per[r.instance.component];
      for (const auto& f : instance_config(r.instance).faults) kinds.insert(f.kind);
      scenarios.insert(r.instance.scenario.filename().string());
      c.require(r.report.has_value(), r.instance.id + ": " + r.error);
      if (r.component_hit) ++hits;
      c.require(r.component_hit, r.instance.id + " attributed to the wrong component");
    }
    for (auto comp : kAllComponents) {
      c.require(per[comp] >= 4, std::string(to_string(comp)) + " has fewer than 4 instances");
    }
    c.require(kinds.size() == 13, "only " + std::to_string(kinds.size()) + " fault kinds covered");
    c.require(scenarios.size() == 5, "only " + std::to_string(scenarios.size()) + " case studies covered");
    c.require(bench_s < 600.0, "benchmark took " + fmt("%.1f", bench_s) + " s");
    report("AC1", "benchmark component-level attribution", c,
           std::to_string(hits) + "/" + std::to_string(results.size()) + " instances, " + fmt("%.1f", bench_s) + " s");
  }

  // AC2
  {
    Check c;
    std::size_t hits = 0;
    std::map<ComponentId, std::pair<std::size_t, std::size_t>> per;
    for (const auto& r : results) {
      auto& [n, k] = per[r.instance.component];
      ++n;
      if (r.message_hit) {
        ++k;
        ++hits;
        continue;
      }
      if (r.instance.component == ComponentId::Control && r.report) {
        const auto d = r.report->fault_distance;
        c.require(d && *d <= 1000, r.instance.id + " misses by more than 1 s");
      }
    }
    c.require(hits * 10 >= results.size() * 9, "overall below 90%");
    for (auto comp : kAllComponents) {
      const auto [n, k] = per[comp];
      if (comp == ComponentId::Control) {
        c.require(k * 10 >= n * 8, "Control below 80%");
      } else {
        c.require(k == n, std::string(to_string(comp)) + " below 100%");
      }
    }
    report("AC2", "message-level attribution", c, std::to_string(hits) + "/" + std::to_string(results.size()));
  }

  // AC3
  {
    Check c;
    double min_rate = 1.0;
    for (const auto& r : results) {
      if (!r.report) continue;
      const auto& rep = *r.report;
      const Scenario sc = load_scenario(r.instance.scenario);
      const Trace tr = run_scheduler(sc, instance_config(r.instance));
      c.require(rep.message_count == tr.message_count(), r.instance.id + " message count differs from the trace");
      c.require(rep.reduction_rate == 1.0 - 1.0 / static_cast<double>(tr.message_count()),
                r.instance.id + " reduction rate formula");
      c.require(tr.message_count() >= 600, r.instance.id + " has fewer than 600 messages");
      c.require(rep.reduction_rate >= 0.998, r.instance.id + " reduction rate below 0.998");
      min_rate = std::min(min_rate, rep.reduction_rate);
    }
    report("AC3", "reduction rate", c, "min " + fmt("%.6f", min_rate));
  }

  // AC4
  {
    Check c;
    std::size_t worst_slack = 0;
    for (const auto& r : results) {
      if (!r.report) continue;
      const auto& rep = *r.report;
      c.require(rep.component_dtests <= 5, r.instance.id + " used more than 5 component re-runs");
      if (rep.component == ComponentId::Planning) {
        c.require(rep.simulations == 2, r.instance.id + " planning used " + std::to_string(rep.simulations) +
                                            " simulations");
        c.require(rep.message_dtests == 0, r.instance.id + " planning ran message-level re-runs");
      } else {
        const std::size_t budget = search_budget(rep.state_count);
        c.require(rep.message_dtests <= budget, r.instance.id + " exceeded the search budget");
        worst_slack = std::max(worst_slack, rep.message_dtests);
      }
    }
    report("AC4", "dtest budget", c, "max message-level re-runs " + std::to_string(worst_slack));
  }

  // AC5
  {
    Check c;
    for (const auto& inst : instances) {
      const Scenario sc = load_scenario(inst.scenario);
      const AdsConfig cfg = instance_config(inst);
      const Trace a = run_scheduler(sc, cfg);
      const Trace b = run_scheduler(sc, cfg);
      c.require(serialize_trace(a, sc) == serialize_trace(b, sc), inst.id + " serializations differ");
      c.require(trace_digest(a, sc) == trace_digest(b, sc), inst.id + " digests differ");
    }
    report("AC5", "deterministic traces", c, std::to_string(instances.size()) + " instances run twice");
  }

  // AC6
  {
    Check c;
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> pos(-6.0, 6.0), half(0.1, 2.0), ang(-3.14159, 3.14159);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const OrientedBox a{{pos(rng), pos(rng)}, {half(rng), half(rng)}, ang(rng)};
      const OrientedBox b{{pos(rng), pos(rng)}, {half(rng), half(rng)}, ang(rng)};
      worst = std::max(worst, std::abs(min_obb_distance(a, b) - dvca::testing::sampled_distance(a, b)));
    }
    c.require(worst <= 1e-3, "box distance differs from sampling by " + fmt("%.2e", worst));

    Scenario road = load_scenario(kData / "scenarios" / "minimal.json");
    std::uniform_real_distribution<double> gap(0.0, 1.5);
    for (int i = 0; i < 50; ++i) {
      Scenario s = road;
      TrafficObject o;
      o.id = 1;
      o.size = {1, 1, 1};
      o.waypoints = {{{12.5 + gap(rng), 0.7}, {}, {}, 0}};
      s.objects = {o};
      const std::vector<EgoState> log{{{10, 0}, 0.0, 0.0, 0.0, 0}};
      bool seen = false;
      for (double cd = 0.0; cd <= 2.0; cd += 0.05) {
        const bool hit = check_safe_distance(log, s, cd).has_value();
        c.require(!seen || hit, "safe distance not monotone in c");
        seen = seen || hit;
      }
    }

    auto cruise = [](double speed) {
      std::vector<EgoState> log;
      for (SimTime t = 0; t <= 1000; t += 10) log.push_back({{20 + speed * t / 1000.0, 0}, 0.0, speed, 0.0, t});
      return log;
    };
    c.require(!check_speeding(cruise(11.0), road.map, 0.5), "speed at the limit flagged");
    c.require(!check_speeding(cruise(11.4), road.map, 0.5), "speed within tolerance flagged");
    c.require(check_speeding(cruise(11.6), road.map, 0.5).has_value(), "speed above tolerance missed");
    const std::vector<EgoState> near{{{108.1, 0}, 0.0, 0.0, 0.0, 0}};
    c.require(check_mission(near, {110, 0}, 2.0), "1.9 m from the destination rejected");
    const std::vector<EgoState> far{{{107.9, 0}, 0.0, 0.0, 0.0, 0}};
    c.require(!check_mission(far, {110, 0}, 2.0), "2.1 m from the destination accepted");
    c.require(!check_mission({}, {110, 0}, 2.0), "empty log accepted");
    Scenario nm = road;
    TrafficObject o;
    o.id = 1;
    o.size = {1, 1, 1};
    o.waypoints = {{{12.75, 0}, {}, {}, 0}};
    nm.objects = {o};
    const std::vector<EgoState> at{{{10, 0}, 0.0, 0.0, 0.0, 0}};
    c.require(check_safe_distance(at, nm, 0.3).has_value(), "0.25 m gap not flagged");
    report("AC6", "oracle properties", c, "max box distance error " + fmt("%.1e", worst));
  }

  // AC7
  {
    Check c;
    std::size_t audited_ok = 0, skipped = 0;
    for (std::size_t i = 0; i < audit_results.size(); ++i) {
      const auto& r = audit_results[i];
      c.require(r.report.has_value(), r.instance.id + ": " + r.error);
      if (!r.report || r.report->component == ComponentId::Planning) continue;
      if (is_non_monotone(*r.report)) {
        ++skipped;
        continue;
      }
      c.require(r.report->audit == AuditOutcome::Pass, r.instance.id + " search differs from the linear scan");
      if (r.report->audit == AuditOutcome::Pass) ++audited_ok;
    }
    const auto dd = attribute_interval_dd(4, [](std::size_t a, std::size_t b) { return a <= 3 && 3 <= b; });
    const std::vector<std::pair<std::size_t, std::size_t>> walk{{1, 2}, {3, 4}, {3, 3}};
    c.require(dd.tested == walk && dd.outcomes == std::vector<bool>{false, true, true}, "walkthrough tests differ");
    c.require(dd.first == 3 && dd.last == 3, "walkthrough result differs");
    report("AC7", "search matches the linear scan", c,
           std::to_string(audited_ok) + " monotone instances agree, " + std::to_string(skipped) + " not monotone");
  }

  // AC8
  {
    Check c;
    const std::map<std::string, std::size_t> failed{{"b1", 1}, {"b2", 1}, {"b5", 1}};
    const std::map<std::string, std::size_t> passed{{"b2", 1}, {"b3", 1}, {"b4", 0}, {"b5", 1}};
    const auto s = tarantula_scores(passed, failed, 1, 1);
    const std::map<std::string, double> expect{{"b1", 1.0}, {"b2", 0.5}, {"b3", 0.0}, {"b4", 0.0}, {"b5", 0.5}};
    c.require(s.size() == 5, "expected 5 blocks");
    for (const auto& x : s) {
      c.require(std::abs(x.score - expect.at(x.block)) <= 1e-12, x.block + " score " + fmt("%.17g", x.score));
    }
    c.require(!s.empty() && s.front().block == "b1", "b1 not ranked first");
    report("AC8", "tarantula scores", c);
  }

  // AC9
  {
    Check c;
    for (const char* name : {"cs1", "cs2", "cs3", "cs4", "cs5"}) {
      const Scenario sc = load_scenario(kData / "scenarios" / (std::string(name) + ".json"));
      c.require(rtest(sc, AdsConfig{}, OracleConfig{}).verdict.passed, std::string(name) + " fails without faults");
    }
    for (const auto& inst : instances) {
      const Scenario sc = load_scenario(inst.scenario);
      const Verdict v = rtest(sc, instance_config(inst), OracleConfig{}).verdict;
      c.require(!v.passed, inst.id + " still passes");
      c.require(!v.violations.empty() && v.violations.front().kind == inst.violation,
                inst.id + " first violation is not " + std::string(to_string(inst.violation)));
    }
    report("AC9", "baseline soundness", c, std::to_string(instances.size()) + " faults flip the verdict");
  }

  return failures == 0 ? 0 : 1;
}
