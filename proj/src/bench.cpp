#include "dvca/bench.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

#include "dvca/json_util.hpp"

namespace dvca {

std::vector<BenchInstance> benchmark_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  const auto& list = json_util::field(j, "instances", "");
  if (!list.is_array()) throw ValidationError("/instances", "expected an array");
  std::vector<BenchInstance> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string path = "/instances/" + std::to_string(i);
    const auto& e = list[i];
    auto str = [&](const char* key) {
      const auto& v = json_util::field(e, key, path);
      if (!v.is_string()) throw ValidationError(path + "/" + key, "expected a string");
      return v.get<std::string>();
    };
    BenchInstance b;
    b.id = str("id");
    b.scenario = base_dir / str("scenario");
    b.fault = base_dir / str("fault");
    b.component = component_from_string(str("component"));
    b.violation = violation_kind_from_string(str("violation"));
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<BenchInstance> load_benchmark(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open benchmark '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return benchmark_from_json(j, path.parent_path());
}

AdsConfig instance_config(const BenchInstance& instance) {
  AdsConfig cfg;
  cfg.faults = load_faults(instance.fault);
  return cfg;
}

namespace {

InstanceResult run_one(const BenchInstance& inst, const BenchOptions& options) {
  InstanceResult r;
  r.instance = inst;
  try {
    Scenario sc = load_scenario(inst.scenario);
    if (options.seed) sc.seed = *options.seed;
    const AdsConfig cfg = instance_config(inst);
    AttributionReport rep = attribute(sc, cfg, options.oracle, options.attribution);
    r.component_hit = rep.component == inst.component;
    r.message_hit = r.component_hit && rep.message_hit;
    r.report = std::move(rep);
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return r;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

std::vector<InstanceResult> run_benchmark(const std::vector<BenchInstance>& instances, const BenchOptions& options,
                                          const std::function<void(const InstanceResult&)>& progress) {
  std::vector<InstanceResult> results(instances.size());
  std::atomic<std::size_t> next = 0;
  std::mutex report_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < instances.size(); i = next++) {
      results[i] = run_one(instances[i], options);
      if (progress) {
        std::lock_guard lock(report_mu);
        progress(results[i]);
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(options.parallel, static_cast<unsigned>(instances.size())));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return results;
}

std::vector<ComponentSummary> summarize(const std::vector<InstanceResult>& results) {
  std::vector<ComponentSummary> rows;
  ComponentSummary total;
  total.total = true;
  auto add = [](ComponentSummary& s, const InstanceResult& r) {
    ++s.instances;
    if (!r.report) {
      ++s.errors;
      return;
    }
    s.component_hits += r.component_hit;
    s.audit_failures += r.report->audit == AuditOutcome::Fail;
    s.message_hits += r.message_hit;
    s.mean_reduction_rate += r.report->reduction_rate;
    s.mean_wall_time += r.report->wall_time;
    s.mean_simulations += static_cast<double>(r.report->simulations);
  };
  auto finish = [](ComponentSummary& s) {
    const std::size_t ok = s.instances - s.errors;
    if (ok == 0) return;
    s.mean_reduction_rate /= static_cast<double>(ok);
    s.mean_wall_time /= static_cast<double>(ok);
    s.mean_simulations /= static_cast<double>(ok);
  };
  for (auto c : kAllComponents) {
    ComponentSummary s;
    s.component = c;
    for (const auto& r : results) {
      if (r.instance.component == c) add(s, r);
    }
    if (s.instances == 0) continue;
    finish(s);
    rows.push_back(s);
  }
  if (results.empty()) return rows;
  for (const auto& r : results) add(total, r);
  finish(total);
  rows.push_back(total);
  return rows;
}

std::string summary_table(const std::vector<ComponentSummary>& rows) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-13s %9s %11s %11s %7s %7s %10s %9s %7s\n", "component", "instances",
                "component%", "message%", "errors", "audit!", "reduction", "wall_s", "sims");
  out += line;
  for (const auto& r : rows) {
    auto pct = [&](std::size_t k) { return r.instances ? 100.0 * static_cast<double>(k) / r.instances : 0.0; };
    const std::string name = r.total ? "all" : std::string(to_string(r.component));
    std::snprintf(line, sizeof line, "%-13s %9zu %11s %11s %7zu %7zu %10s %9s %7s\n", name.c_str(), r.instances,
                  fmt("%.1f", pct(r.component_hits)).c_str(), fmt("%.1f", pct(r.message_hits)).c_str(), r.errors,
                  r.audit_failures,
                  fmt("%.5f", r.mean_reduction_rate).c_str(), fmt("%.3f", r.mean_wall_time).c_str(),
                  fmt("%.1f", r.mean_simulations).c_str());
    out += line;
  }
  return out;
}

nlohmann::ordered_json bench_to_json(const std::vector<InstanceResult>& results,
                                     const std::vector<ComponentSummary>& rows) {
  nlohmann::ordered_json j;
  auto& inst = j["instances"] = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    nlohmann::ordered_json e;
    e["id"] = r.instance.id;
    e["expected_component"] = to_string(r.instance.component);
    e["component_hit"] = r.component_hit;
    e["message_hit"] = r.message_hit;
    if (r.report) {
      e["report"] = report_to_json(*r.report);
    } else {
      e["error"] = r.error;
    }
    inst.push_back(std::move(e));
  }
  auto& sum = j["summary"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    sum.push_back({{"component", r.total ? std::string("all") : std::string(to_string(r.component))},
                   {"instances", r.instances},
                   {"component_hits", r.component_hits},
                   {"message_hits", r.message_hits},
                   {"errors", r.errors},
                   {"audit_failures", r.audit_failures},
                   {"mean_reduction_rate", r.mean_reduction_rate},
                   {"mean_wall_time_s", r.mean_wall_time},
                   {"mean_simulations", r.mean_simulations}});
  }
  return j;
}

}  // namespace dvca
