#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>

#include "dvca/engine.hpp"
#include "dvca/faults.hpp"
#include "dvca/geometry.hpp"
#include "dvca/simulator.hpp"
#include "dvca/trace.hpp"

namespace py = pybind11;
using namespace dvca;

namespace {

AdsConfig config_for(const std::string& fault_path) {
  AdsConfig cfg;
  if (!fault_path.empty()) cfg.faults = load_faults(fault_path);
  return cfg;
}

OracleConfig oracle_for(const std::string& oracle_json) {
  return oracle_json.empty() ? OracleConfig{} : oracle_config_from_json(nlohmann::json::parse(oracle_json));
}

// Runs a scenario and returns the verdict plus trace statistics as a JSON string.
std::string run_json(const std::string& scenario_path, const std::string& fault_path, const std::string& oracle_json) {
  const Scenario sc = load_scenario(scenario_path);
  RunResult r;
  {
    py::gil_scoped_release release;
    r = rtest(sc, config_for(fault_path), oracle_for(oracle_json));
  }
  nlohmann::ordered_json j;
  j["verdict"] = verdict_to_json(r.verdict);
  j["message_count"] = r.trace.message_count();
  auto& rows = j["rows"] = nlohmann::ordered_json::object();
  for (auto c : kAllComponents) rows[std::string(to_string(c))] = r.trace.row(c).size();
  j["digest"] = trace_digest(r.trace, sc);
  return j.dump();
}

std::string attribute_json(const std::string& scenario_path, const std::string& fault_path, const std::string& strategy,
                           bool audit, const std::string& oracle_json) {
  const Scenario sc = load_scenario(scenario_path);
  AttributionOptions opt;
  opt.strategy = strategy_from_string(strategy);
  opt.audit_monotonicity = audit;
  AttributionReport r;
  {
    py::gil_scoped_release release;
    r = attribute(sc, config_for(fault_path), oracle_for(oracle_json), opt);
  }
  return report_to_json(r).dump();
}

}  // namespace

PYBIND11_MODULE(_dvca, m) {
  m.doc() = "Driving-violation cause attribution core";

  auto base = py::register_exception<Error>(m, "DvcaError");
  py::register_exception<NoViolation>(m, "NoViolation", base);
  py::register_exception<Unattributable>(m, "Unattributable", base);

  m.def("run", &run_json, py::arg("scenario"), py::arg("fault") = "", py::arg("oracle") = "",
        "Run a scenario; returns the verdict as a JSON string");
  m.def("attribute", &attribute_json, py::arg("scenario"), py::arg("fault") = "", py::arg("strategy") = "binary",
        py::arg("audit") = false, py::arg("oracle") = "", "Attribute a violation; returns the report as a JSON string");

  m.def(
      "tarantula",
      [](const std::map<std::string, std::size_t>& passed, const std::map<std::string, std::size_t>& failed,
         std::size_t total_passed, std::size_t total_failed) {
        std::vector<std::pair<std::string, double>> out;
        for (const auto& s : tarantula_scores(passed, failed, total_passed, total_failed)) out.emplace_back(s.block, s.score);
        return out;
      },
      py::arg("passed"), py::arg("failed"), py::arg("total_passed"), py::arg("total_failed"));

  m.def(
      "box_distance",
      [](std::pair<double, double> c1, double h1, std::pair<double, double> e1, std::pair<double, double> c2,
         double h2, std::pair<double, double> e2) {
        const OrientedBox a{{c1.first, c1.second}, {e1.first, e1.second}, h1};
        const OrientedBox b{{c2.first, c2.second}, {e2.first, e2.second}, h2};
        return min_obb_distance(a, b);
      },
      py::arg("center_a"), py::arg("heading_a"), py::arg("half_extents_a"), py::arg("center_b"),
      py::arg("heading_b"), py::arg("half_extents_b"));

  m.def("reduction_rate", &reduction_rate, py::arg("message_count"));
}
