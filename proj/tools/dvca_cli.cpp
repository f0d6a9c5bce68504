// dvca: run scenarios, attribute violations, run the benchmark, replay traces.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dvca/bench.hpp"
#include "dvca/engine.hpp"
#include "dvca/faults.hpp"
#include "dvca/oracles.hpp"
#include "dvca/simulator.hpp"
#include "dvca/trace.hpp"

namespace fs = std::filesystem;
using namespace dvca;

namespace {

enum Exit { kPass = 0, kViolation = 1, kError = 2, kNoViolation = 3, kUnattributable = 4 };

struct Common {
  std::string oracle_config;
  std::string fault;
  std::string out_dir = "dvca-out";
  unsigned parallel = 1;
  bool audit = false;
  std::string strategy = "binary";
  std::optional<std::uint64_t> seed;
};

OracleConfig oracle_of(const Common& c) {
  return c.oracle_config.empty() ? OracleConfig{} : load_oracle_config(c.oracle_config);
}

Scenario scenario_of(const std::string& path, const Common& c) {
  Scenario sc = load_scenario(path);
  if (c.seed) sc.seed = *c.seed;
  return sc;
}

AdsConfig config_of(const Common& c) {
  AdsConfig cfg;
  if (!c.fault.empty()) cfg.faults = load_faults(c.fault);
  return cfg;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path.string() + "'");
  out << text;
}

void print_verdict(const Verdict& v) {
  if (v.passed) {
    std::cout << "PASS\n";
    return;
  }
  std::cout << "VIOLATION\n";
  for (const auto& x : v.violations) {
    std::cout << "  " << to_string(x.kind) << " at " << x.t << " ms: " << x.detail << "\n";
  }
}

int cmd_run(const std::string& scenario_path, const Common& c) {
  const Scenario sc = scenario_of(scenario_path, c);
  const RunResult r = rtest(sc, config_of(c), oracle_of(c));
  const fs::path dir = c.out_dir;
  fs::create_directories(dir);
  save_trace(dir / "trace.jsonl", r.trace, sc);
  write_file(dir / "verdict.json", verdict_to_json(r.verdict).dump(2) + "\n");
  print_verdict(r.verdict);
  std::cout << "messages: " << r.trace.message_count() << "\n";
  std::cout << "digest: " << trace_digest(r.trace, sc) << "\n";
  return r.verdict.passed ? kPass : kViolation;
}

int cmd_attribute(const std::string& scenario_path, const Common& c) {
  const Scenario sc = scenario_of(scenario_path, c);
  AttributionOptions opt;
  opt.strategy = strategy_from_string(c.strategy);
  opt.audit_monotonicity = c.audit;
  opt.concurrent = c.parallel > 1;
  Trace original;
  const AttributionReport r = attribute(sc, config_of(c), oracle_of(c), opt, &original);
  const fs::path dir = c.out_dir;
  write_file(dir / "report.json", report_to_json(r).dump(2) + "\n");
  write_file(dir / "verdict_matrix.csv", verdict_matrix_csv(original, r.matrix));
  std::printf("component:      %s\n", std::string(to_string(r.component)).c_str());
  std::printf("focus message:  %s #%u at %lld ms\n", std::string(to_string(r.focus.component)).c_str(), r.focus.seq,
              static_cast<long long>(r.focus.t_pub));
  if (r.interval) std::printf("state interval: [%zu, %zu]\n", r.interval->first, r.interval->second);
  std::printf("reduction rate: %.6f (%zu messages)\n", r.reduction_rate, r.message_count);
  std::printf("dtests:         %zu component, %zu message\n", r.component_dtests, r.message_dtests);
  std::printf("wall time:      %.3f s\n", r.wall_time);
  if (r.audit != AuditOutcome::Skipped) {
    std::printf("monotonicity:   %s\n", std::string(to_string(r.audit)).c_str());
  }
  if (r.audit == AuditOutcome::Fail) {
    for (const auto& n : r.notes) std::cerr << "  " << n << "\n";
    std::cerr << "error: the monotonicity audit contradicts the search\n";
    return kError;
  }
  return kPass;
}

int cmd_bench(const std::string& bench_path, const Common& c) {
  BenchOptions opt;
  opt.parallel = c.parallel;
  opt.oracle = oracle_of(c);
  opt.seed = c.seed;
  opt.attribution.strategy = strategy_from_string(c.strategy);
  opt.attribution.audit_monotonicity = c.audit;
  const auto instances = load_benchmark(bench_path);
  const auto results = run_benchmark(instances, opt, [](const InstanceResult& r) {
    if (r.report) {
      std::fprintf(stderr, "%-18s %-12s component %s, message %s\n", r.instance.id.c_str(),
                   std::string(to_string(r.report->component)).c_str(), r.component_hit ? "ok" : "MISS",
                   r.message_hit ? "ok" : "MISS");
    } else {
      std::fprintf(stderr, "%-18s error: %s\n", r.instance.id.c_str(), r.error.c_str());
    }
  });
  const auto rows = summarize(results);
  const std::string table = summary_table(rows);
  const fs::path dir = c.out_dir;
  write_file(dir / "summary.txt", table);
  write_file(dir / "bench.json", bench_to_json(results, rows).dump(2) + "\n");
  std::cout << table;
  return kPass;
}

int cmd_replay(const std::string& trace_path, const Common& c) {
  const LoadedTrace lt = load_trace(trace_path);
  const Scenario& sc = lt.scenario;
  std::string csv = "t_ms,ego_x,ego_y,ego_heading,ego_speed";
  for (const auto& o : sc.objects) {
    csv += ",obj" + std::to_string(o.id) + "_x,obj" + std::to_string(o.id) + "_y";
  }
  csv += ",min_distance\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return std::string(buf);
  };
  for (const auto& e : lt.trace.ego_log) {
    csv += std::to_string(e.t) + "," + num(e.p.x) + "," + num(e.p.y) + "," + num(e.heading) + "," + num(e.speed);
    const OrientedBox eb = ego_box(e, sc.ego_size);
    double dmin = -1.0;
    for (const auto& o : sc.objects) {
      const OrientedBox ob = bbox_at(o, e.t);
      csv += "," + num(ob.center.x) + "," + num(ob.center.y);
      const double d = min_obb_distance(eb, ob);
      if (dmin < 0.0 || d < dmin) dmin = d;
    }
    csv += "," + (dmin < 0.0 ? std::string() : num(dmin)) + "\n";
  }
  write_file(fs::path(c.out_dir) / "replay.csv", csv);
  std::cout << "rows: " << lt.trace.ego_log.size() << "\n";
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driving-violation cause attribution"};
  app.require_subcommand(1);
  Common common;
  std::string target;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--oracle-config", common.oracle_config, "Oracle thresholds (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--out-dir", common.out_dir, "Directory for output files");
    sub->add_option("--seed", seed, "Override the scenario seed");
  };

  auto* run = app.add_subcommand("run", "Run a scenario and check the oracles");
  run->add_option("scenario", target, "Scenario file")->required();
  run->add_option("--fault", common.fault, "Fault configuration");
  add_common(run);

  auto* attr = app.add_subcommand("attribute", "Attribute a violation to a component and a message");
  attr->add_option("scenario", target, "Scenario file")->required();
  attr->add_option("--fault", common.fault, "Fault configuration");
  attr->add_option("--parallel", common.parallel, "Concurrent re-runs")->check(CLI::PositiveNumber);
  attr->add_flag("--audit-monotonicity", common.audit, "Check the search against a full linear scan");
  attr->add_option("--strategy", common.strategy, "Message-level search")
      ->check(CLI::IsMember({"binary", "interval-dd"}));
  add_common(attr);

  auto* bench = app.add_subcommand("bench", "Attribute every benchmark instance");
  bench->add_option("benchmark", target, "Benchmark file")->required();
  bench->add_option("--parallel", common.parallel, "Instances run at once")->check(CLI::PositiveNumber);
  bench->add_flag("--audit-monotonicity", common.audit, "Check the search against a full linear scan");
  bench->add_option("--strategy", common.strategy, "Message-level search")
      ->check(CLI::IsMember({"binary", "interval-dd"}));
  add_common(bench);

  auto* replay = app.add_subcommand("replay", "Write plot data for a recorded trace");
  replay->add_option("trace", target, "Trace file")->required();
  replay->add_option("--out-dir", common.out_dir, "Directory for output files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kError;
  }
  for (auto* sub : {run, attr, bench}) {
    if (sub->parsed() && sub->count("--seed") > 0) common.seed = seed;
  }

  try {
    if (run->parsed()) return cmd_run(target, common);
    if (attr->parsed()) return cmd_attribute(target, common);
    if (bench->parsed()) return cmd_bench(target, common);
    if (replay->parsed()) return cmd_replay(target, common);
  } catch (const NoViolation& e) {
    std::cerr << "no violation: " << e.what() << "\n";
    return kNoViolation;
  } catch (const Unattributable& e) {
    std::cerr << "unattributable: " << e.what() << "\n";
    for (const auto& o : e.outcomes()) std::cerr << "  " << o.label << ": " << (o.passed ? "pass" : "fail") << "\n";
    return kUnattributable;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
