#include <gtest/gtest.h>

#include "dvca/bench.hpp"
#include "dvca/errors.hpp"
#include "helpers.hpp"

using namespace dvca;
using dvca::testing::bench_dir;

TEST(Bench, LoadsAllInstances) {
  const auto instances = load_benchmark(bench_dir() / "benchmark.json");
  EXPECT_EQ(instances.size(), 41u);
  std::map<ComponentId, std::size_t> per;
  for (const auto& i : instances) {
    ++per[i.component];
    EXPECT_TRUE(std::filesystem::exists(i.scenario)) << i.id;
    EXPECT_TRUE(std::filesystem::exists(i.fault)) << i.id;
    EXPECT_EQ(instance_config(i).faults.front().target, i.component) << i.id;
  }
  EXPECT_EQ(per[ComponentId::Perception], 17u);
  EXPECT_EQ(per[ComponentId::Prediction], 4u);
  EXPECT_EQ(per[ComponentId::Planning], 11u);
  EXPECT_EQ(per[ComponentId::Control], 5u);
  EXPECT_EQ(per[ComponentId::Localization], 4u);
}

TEST(Bench, RejectsBadInstance) {
  const auto j = nlohmann::json::parse(R"({"instances": [{"id": "x", "scenario": "s.json"}]})");
  EXPECT_THROW(benchmark_from_json(j, "."), Error);
}

TEST(Bench, EmptyBenchmark) {
  const auto instances = benchmark_from_json(nlohmann::json::parse(R"({"instances": []})"), ".");
  EXPECT_TRUE(instances.empty());
  const auto results = run_benchmark(instances, BenchOptions{});
  EXPECT_TRUE(results.empty());
  EXPECT_TRUE(summarize(results).empty());
}

TEST(Bench, RunsAndSummarizes) {
  auto instances = load_benchmark(bench_dir() / "benchmark.json");
  std::vector<BenchInstance> pick;
  for (const auto& i : instances) {
    if (i.id == "cs1_pred_wrong" || i.id == "cs1_plan_none" || i.id == "cs2_perc_miss") pick.push_back(i);
  }
  ASSERT_EQ(pick.size(), 3u);
  BenchOptions opt;
  opt.parallel = 2;
  std::size_t progress = 0;
  const auto results = run_benchmark(pick, opt, [&](const InstanceResult&) { ++progress; });
  EXPECT_EQ(progress, 3u);
  ASSERT_EQ(results.size(), 3u);
  for (const auto& r : results) {
    EXPECT_TRUE(r.report) << r.instance.id << ": " << r.error;
    EXPECT_TRUE(r.component_hit) << r.instance.id;
    EXPECT_TRUE(r.message_hit) << r.instance.id;
  }
  const auto rows = summarize(results);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_TRUE(rows.back().total);
  EXPECT_EQ(rows.back().instances, 3u);
  EXPECT_EQ(rows.back().component_hits, 3u);
  const std::string table = summary_table(rows);
  EXPECT_NE(table.find("Prediction"), std::string::npos);
  const auto j = bench_to_json(results, rows);
  EXPECT_EQ(j.at("instances").size(), 3u);
}

TEST(Bench, MissingFaultFileIsRecorded) {
  BenchInstance bad;
  bad.id = "broken";
  bad.scenario = dvca::testing::scenario_path("cs1");
  bad.fault = bench_dir() / "does_not_exist.json";
  const auto results = run_benchmark({bad}, BenchOptions{});
  ASSERT_EQ(results.size(), 1u);
  EXPECT_FALSE(results[0].report);
  EXPECT_FALSE(results[0].error.empty());
  EXPECT_EQ(summarize(results).back().errors, 1u);
}
