#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dvca/engine.hpp"
#include "dvca/faults.hpp"

namespace dvca {

struct BenchInstance {
  std::string id;
  std::filesystem::path scenario;  // resolved against the benchmark file
  std::filesystem::path fault;
  ComponentId component = ComponentId::Perception;
  ViolationKind violation = ViolationKind::SafeDistance;
};

std::vector<BenchInstance> benchmark_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
std::vector<BenchInstance> load_benchmark(const std::filesystem::path& path);

struct BenchOptions {
  unsigned parallel = 1;
  AttributionOptions attribution;
  OracleConfig oracle;
  std::optional<std::uint64_t> seed;
};

struct InstanceResult {
  BenchInstance instance;
  std::optional<AttributionReport> report;
  std::string error;
  bool component_hit = false;
  bool message_hit = false;
};

/// Instances are independent; up to `parallel` run at once. Failures are
/// recorded per instance. `progress` is called once per finished instance.
std::vector<InstanceResult> run_benchmark(const std::vector<BenchInstance>& instances, const BenchOptions& options,
                                          const std::function<void(const InstanceResult&)>& progress = {});

/// Builds the run configuration for one instance.
AdsConfig instance_config(const BenchInstance& instance);

struct ComponentSummary {
  ComponentId component = ComponentId::Perception;
  bool total = false;
  std::size_t instances = 0;
  std::size_t component_hits = 0;
  std::size_t message_hits = 0;
  std::size_t errors = 0;
  std::size_t audit_failures = 0;
  double mean_reduction_rate = 0.0;
  double mean_wall_time = 0.0;
  double mean_simulations = 0.0;
};

/// One row per component present in the results, in pipeline order, plus a final total row.
std::vector<ComponentSummary> summarize(const std::vector<InstanceResult>& results);
std::string summary_table(const std::vector<ComponentSummary>& rows);
nlohmann::ordered_json bench_to_json(const std::vector<InstanceResult>& results,
                                     const std::vector<ComponentSummary>& rows);

}  // namespace dvca
