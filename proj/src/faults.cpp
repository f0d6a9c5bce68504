#include "dvca/faults.hpp"

#include <array>
#include <fstream>
#include <utility>

#include "dvca/errors.hpp"
#include "dvca/json_util.hpp"

namespace dvca {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct KindInfo {
  FaultKind kind;
  std::string_view name;
  ComponentId target;
};

constexpr std::array<KindInfo, 13> kKinds = {{
    {FaultKind::MissDetection, "MissDetection", ComponentId::Perception},
    {FaultKind::WrongBBox, "WrongBBox", ComponentId::Perception},
    {FaultKind::WrongLongitudinalDist, "WrongLongitudinalDist", ComponentId::Perception},
    {FaultKind::WrongLateralDist, "WrongLateralDist", ComponentId::Perception},
    {FaultKind::WrongVelocity, "WrongVelocity", ComponentId::Perception},
    {FaultKind::NoPredictionTrajectory, "NoPredictionTrajectory", ComponentId::Prediction},
    {FaultKind::WrongPredictionTrajectory, "WrongPredictionTrajectory", ComponentId::Prediction},
    {FaultKind::IncorrectPathPlanning, "IncorrectPathPlanning", ComponentId::Planning},
    {FaultKind::IncorrectSpeedPlanning, "IncorrectSpeedPlanning", ComponentId::Planning},
    {FaultKind::NoPlanningTrajectory, "NoPlanningTrajectory", ComponentId::Planning},
    {FaultKind::WrongLongitudinalCommand, "WrongLongitudinalCommand", ComponentId::Control},
    {FaultKind::WrongLateralCommand, "WrongLateralCommand", ComponentId::Control},
    {FaultKind::WrongLateralLocalization, "WrongLateralLocalization", ComponentId::Localization},
}};

const KindInfo& info(FaultKind k) {
  for (const auto& i : kKinds) {
    if (i.kind == k) return i;
  }
  throw Error("unknown fault kind");
}

}  // namespace

std::string_view to_string(FaultKind k) { return info(k).name; }

FaultKind fault_kind_from_string(std::string_view s) {
  for (const auto& i : kKinds) {
    if (i.name == s) return i.kind;
  }
  throw ParseError("unknown fault kind '" + std::string(s) + "'");
}

ComponentId target_of(FaultKind k) { return info(k).target; }

bool FaultTrigger::active(SimTime t, Vec2 ego_p) const {
  if (t < t0 || t >= t1) return false;
  if (region && (ego_p - region->center).norm() > region->radius) return false;
  return true;
}

FaultSpec fault_from_json(const json& j, const std::string& path) {
  using namespace json_util;
  FaultSpec f;
  try {
    f.kind = fault_kind_from_string(field(j, "kind", path).get<std::string>());
    f.target = j.contains("target") ? component_from_string(j["target"].get<std::string>()) : target_of(f.kind);
    if (f.target != target_of(f.kind)) {
      throw ValidationError(path + "/target", std::string(to_string(f.kind)) + " cannot target " +
                                                  std::string(to_string(f.target)));
    }
    if (j.contains("trigger")) {
      const json& tj = j["trigger"];
      if (tj.contains("t0_ms")) f.trigger.t0 = tj["t0_ms"].get<SimTime>();
      if (tj.contains("t1_ms")) f.trigger.t1 = tj["t1_ms"].get<SimTime>();
      if (tj.contains("object_id")) f.trigger.object_id = tj["object_id"].get<int>();
      if (tj.contains("region")) {
        f.trigger.region = Region{vec(field(tj["region"], "center", path + "/trigger/region"), path + "/trigger/region/center"),
                                  number<double>(tj["region"], "radius", path + "/trigger/region")};
      }
      if (f.trigger.t1 <= f.trigger.t0) throw ValidationError(path + "/trigger", "empty time window");
    }
    if (j.contains("magnitude")) {
      const json& mj = j["magnitude"];
      f.magnitude.value = mj.value("value", 0.0);
      if (mj.contains("velocity")) f.magnitude.velocity = vec(mj["velocity"], path + "/magnitude/velocity");
      f.magnitude.length_scale = mj.value("length_scale", 1.0);
      f.magnitude.width_scale = mj.value("width_scale", 1.0);
      if (!(f.magnitude.length_scale > 0 && f.magnitude.width_scale > 0)) {
        throw ValidationError(path + "/magnitude", "box scales must be positive");
      }
    }
    f.note = j.value("note", std::string{});
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return f;
}

ordered_json fault_to_json(const FaultSpec& f) {
  ordered_json j;
  j["target"] = to_string(f.target);
  j["kind"] = to_string(f.kind);
  ordered_json tj;
  tj["t0_ms"] = f.trigger.t0;
  if (f.trigger.t1 != std::numeric_limits<SimTime>::max()) tj["t1_ms"] = f.trigger.t1;
  if (f.trigger.object_id) tj["object_id"] = *f.trigger.object_id;
  if (f.trigger.region) {
    tj["region"] = {{"center", json_util::vec(f.trigger.region->center)}, {"radius", f.trigger.region->radius}};
  }
  j["trigger"] = std::move(tj);
  j["magnitude"] = {{"value", f.magnitude.value},
                    {"velocity", json_util::vec(f.magnitude.velocity)},
                    {"length_scale", f.magnitude.length_scale},
                    {"width_scale", f.magnitude.width_scale}};
  if (!f.note.empty()) j["note"] = f.note;
  return j;
}

std::vector<FaultSpec> faults_from_json(const json& j) {
  std::vector<FaultSpec> out;
  const json* list = &j;
  if (j.is_object() && j.contains("faults")) list = &j["faults"];
  if (list->is_array()) {
    for (std::size_t i = 0; i < list->size(); ++i) out.push_back(fault_from_json((*list)[i], "/faults/" + std::to_string(i)));
  } else if (list->is_object()) {
    out.push_back(fault_from_json(*list));
  } else {
    throw ParseError("fault config must be an object or array");
  }
  return out;
}

std::vector<FaultSpec> load_faults(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open fault config " + path.string());
  try {
    return faults_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace dvca
