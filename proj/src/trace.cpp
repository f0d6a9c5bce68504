#include "dvca/trace.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "dvca/errors.hpp"
#include "dvca/json_util.hpp"

namespace dvca {

using nlohmann::json;
using nlohmann::ordered_json;
using json_util::vec;

std::size_t Trace::message_count() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.size();
  return n;
}

const Message& Trace::message(ComponentId c, std::uint32_t seq) const {
  const auto& r = row(c);
  if (seq < 1 || seq > r.size()) {
    throw IndexError(std::string(to_string(c)) + " has no message " + std::to_string(seq));
  }
  return r[seq - 1];
}

const EgoState& Trace::ego_at(SimTime t) const {
  if (ego_log.empty()) throw IndexError("trace has no ego log");
  auto it = std::upper_bound(ego_log.begin(), ego_log.end(), t,
                             [](SimTime q, const EgoState& e) { return q < e.t; });
  if (it == ego_log.begin()) return ego_log.front();
  return *(it - 1);
}

std::vector<const Message*> Trace::publish_order() const {
  std::array<std::size_t, kComponentCount> prio{};
  for (std::size_t i = 0; i < kSchedulePriority.size(); ++i) prio[index(kSchedulePriority[i])] = i;
  std::vector<const Message*> all;
  all.reserve(message_count());
  for (const auto& r : rows) {
    for (const auto& m : r) all.push_back(&m);
  }
  std::stable_sort(all.begin(), all.end(), [&](const Message* a, const Message* b) {
    if (a->t_pub != b->t_pub) return a->t_pub < b->t_pub;
    if (a->component != b->component) return prio[index(a->component)] < prio[index(b->component)];
    return a->seq < b->seq;
  });
  return all;
}

std::vector<const Message*> trace_suffix(const Trace& trace, ComponentId component, std::uint32_t i) {
  const auto& r = trace.row(component);
  if (i < 1 || i > r.size() + 1) {
    throw IndexError("suffix index " + std::to_string(i) + " outside [1, " + std::to_string(r.size() + 1) + "]");
  }
  std::vector<const Message*> out;
  for (std::size_t k = i - 1; k < r.size(); ++k) out.push_back(&r[k]);
  return out;
}

const Message& Bus::publish(ComponentId component, Payload payload, SimTime t, bool fault_affected,
                            bool substituted) {
  if (payload.index() != index(component)) throw OrderError("payload type does not match component");
  auto& r = trace_.row(component);
  if (!r.empty() && t < r.back().t_pub) {
    throw OrderError(std::string(to_string(component)) + " published at " + std::to_string(t) +
                     " after " + std::to_string(r.back().t_pub));
  }
  Message m;
  m.component = component;
  m.seq = static_cast<std::uint32_t>(r.size() + 1);
  m.t_pub = t;
  m.payload = std::move(payload);
  m.fault_affected = fault_affected;
  m.substituted = substituted;
  r.push_back(std::move(m));
  return r.back();
}

const Message* Bus::latest(ComponentId component) const {
  const auto& r = trace_.row(component);
  return r.empty() ? nullptr : &r.back();
}

std::vector<const Message*> Bus::history(ComponentId component, std::size_t k) const {
  const auto& r = trace_.row(component);
  std::vector<const Message*> out;
  const std::size_t first = r.size() > k ? r.size() - k : 0;
  for (std::size_t i = first; i < r.size(); ++i) out.push_back(&r[i]);
  return out;
}

void Bus::record_execution(ComponentId component, std::span<const ComponentId> inputs, const Message& output) {
  ExecutionRecord rec;
  rec.component = component;
  for (ComponentId in : inputs) {
    if (const Message* m = latest(in)) rec.inputs.emplace_back(in, m->seq);
  }
  rec.output_seq = output.seq;
  rec.t = output.t_pub;
  trace_.executions.push_back(std::move(rec));
}

namespace {

ordered_json box_to_json(const OrientedBox& b) {
  return ordered_json{{"center", vec(b.center)}, {"half", vec(b.half_extents)}, {"heading", b.heading}};
}

OrientedBox box_from_json(const json& j) {
  return {vec(j.at("center"), "center"), vec(j.at("half"), "half"), j.at("heading").get<double>()};
}

}  // namespace

ordered_json payload_to_json(const Payload& p) {
  return std::visit(
      [](const auto& v) -> ordered_json {
        using T = std::decay_t<decltype(v)>;
        ordered_json j;
        if constexpr (std::is_same_v<T, PerceptionOut>) {
          j["objects"] = ordered_json::array();
          for (const auto& o : v.objects) {
            ordered_json oj;
            oj["id"] = o.id;
            oj["kind"] = to_string(o.kind);
            oj["box"] = box_to_json(o.box);
            oj["v"] = o.v ? vec(*o.v) : ordered_json(nullptr);
            j["objects"].push_back(std::move(oj));
          }
        } else if constexpr (std::is_same_v<T, PredictionOut>) {
          j["trajectories"] = ordered_json::array();
          for (const auto& tr : v.trajectories) {
            ordered_json pts = ordered_json::array();
            for (const auto& pt : tr.points) pts.push_back({pt.t, pt.p.x, pt.p.y});
            j["trajectories"].push_back({{"id", tr.id}, {"points", std::move(pts)}});
          }
        } else if constexpr (std::is_same_v<T, PlanningOut>) {
          j["decision"] = to_string(v.decision);
          ordered_json pts = ordered_json::array();
          for (const auto& pt : v.trajectory) pts.push_back({pt.t, pt.p.x, pt.p.y, pt.speed, pt.heading});
          j["trajectory"] = std::move(pts);
          j["coverage"] = v.coverage;
        } else if constexpr (std::is_same_v<T, ControlOut>) {
          j["accel_cmd"] = v.accel_cmd;
          j["steer"] = v.steer;
        } else {
          j["p"] = vec(v.p);
          j["heading"] = v.heading;
          j["speed"] = v.speed;
          j["accel"] = v.accel;
        }
        return j;
      },
      p);
}

Payload payload_from_json(ComponentId c, const json& j) {
  switch (c) {
    case ComponentId::Perception: {
      PerceptionOut out;
      for (const auto& oj : j.at("objects")) {
        PerceivedObject o;
        o.id = oj.at("id").get<int>();
        o.kind = object_kind_from_string(oj.at("kind").get<std::string>());
        o.box = box_from_json(oj.at("box"));
        if (!oj.at("v").is_null()) o.v = vec(oj["v"], "v");
        out.objects.push_back(o);
      }
      return out;
    }
    case ComponentId::Prediction: {
      PredictionOut out;
      for (const auto& tj : j.at("trajectories")) {
        PredictedTrajectory tr;
        tr.id = tj.at("id").get<int>();
        for (const auto& pj : tj.at("points")) {
          tr.points.push_back({pj.at(0).get<SimTime>(), {pj.at(1).get<double>(), pj.at(2).get<double>()}});
        }
        out.trajectories.push_back(std::move(tr));
      }
      return out;
    }
    case ComponentId::Planning: {
      PlanningOut out;
      const auto d = j.at("decision").get<std::string>();
      for (auto dec : {Decision::Cruise, Decision::Stop, Decision::Nudge, Decision::Emergency}) {
        if (to_string(dec) == d) out.decision = dec;
      }
      for (const auto& pj : j.at("trajectory")) {
        out.trajectory.push_back({pj.at(0).get<SimTime>(),
                                  {pj.at(1).get<double>(), pj.at(2).get<double>()},
                                  pj.at(3).get<double>(),
                                  pj.at(4).get<double>()});
      }
      out.coverage = j.at("coverage").get<std::vector<std::string>>();
      return out;
    }
    case ComponentId::Control:
      return ControlOut{j.at("accel_cmd").get<double>(), j.at("steer").get<double>()};
    case ComponentId::Localization:
      return LocalizationOut{vec(j.at("p"), "p"), j.at("heading").get<double>(), j.at("speed").get<double>(),
                             j.at("accel").get<double>()};
  }
  throw ParseError("bad component");
}

ordered_json verdict_to_json(const Verdict& v) {
  ordered_json j;
  j["passed"] = v.passed;
  j["violations"] = ordered_json::array();
  for (const auto& viol : v.violations) {
    j["violations"].push_back({{"kind", to_string(viol.kind)}, {"t_ms", viol.t}, {"detail", viol.detail}});
  }
  return j;
}

Verdict verdict_from_json(const json& j) {
  Verdict v;
  v.passed = j.at("passed").get<bool>();
  for (const auto& vj : j.at("violations")) {
    v.violations.push_back({violation_kind_from_string(vj.at("kind").get<std::string>()), vj.at("t_ms").get<SimTime>(),
                            vj.at("detail").get<std::string>()});
  }
  return v;
}

void write_trace(std::ostream& out, const Trace& trace, const Scenario& scenario) {
  ordered_json header;
  header["type"] = "header";
  header["format"] = "dvca-trace/1";
  header["scenario"] = scenario_to_json(scenario);
  out << header.dump() << '\n';

  // Execution records are looked up by (component, output seq).
  std::array<std::vector<const ExecutionRecord*>, kComponentCount> exec_of;
  for (std::size_t c = 0; c < kComponentCount; ++c) exec_of[c].assign(trace.rows[c].size() + 1, nullptr);
  for (const auto& rec : trace.executions) {
    auto& slot = exec_of[index(rec.component)];
    if (rec.output_seq < slot.size()) slot[rec.output_seq] = &rec;
  }

  for (const Message* m : trace.publish_order()) {
    ordered_json j;
    j["type"] = "msg";
    j["component"] = to_string(m->component);
    j["seq"] = m->seq;
    j["t_pub"] = m->t_pub;
    j["fault"] = m->fault_affected;
    j["substituted"] = m->substituted;
    ordered_json inputs = ordered_json::array();
    if (const ExecutionRecord* rec = exec_of[index(m->component)][m->seq]) {
      for (const auto& [c, seq] : rec->inputs) inputs.push_back({to_string(c), seq});
    }
    j["inputs"] = std::move(inputs);
    j["payload"] = payload_to_json(m->payload);
    out << j.dump() << '\n';
  }
  for (const auto& e : trace.ego_log) {
    ordered_json j;
    j["type"] = "ego";
    j["t"] = e.t;
    j["p"] = vec(e.p);
    j["heading"] = e.heading;
    j["speed"] = e.speed;
    j["accel"] = e.accel;
    out << j.dump() << '\n';
  }
  ordered_json vj;
  vj["type"] = "verdict";
  vj["verdict"] = verdict_to_json(trace.verdict);
  vj["collided"] = trace.collided;
  vj["diagnostics"] = trace.diagnostics;
  out << vj.dump() << '\n';
}

std::string serialize_trace(const Trace& trace, const Scenario& scenario) {
  std::ostringstream out;
  write_trace(out, trace, scenario);
  return out.str();
}

void save_trace(const std::filesystem::path& path, const Trace& trace, const Scenario& scenario) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_trace(out, trace, scenario);
}

LoadedTrace parse_trace(std::istream& in) {
  LoadedTrace lt;
  std::string line;
  bool have_header = false;
  bool have_verdict = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (type == "header") {
        lt.scenario = scenario_from_json(j.at("scenario"));
        lt.trace.scenario_name = lt.scenario.name;
        have_header = true;
      } else if (type == "msg") {
        Message m;
        m.component = component_from_string(j.at("component").get<std::string>());
        m.seq = j.at("seq").get<std::uint32_t>();
        m.t_pub = j.at("t_pub").get<SimTime>();
        m.fault_affected = j.at("fault").get<bool>();
        m.substituted = j.at("substituted").get<bool>();
        m.payload = payload_from_json(m.component, j.at("payload"));
        ExecutionRecord rec;
        rec.component = m.component;
        for (const auto& ij : j.at("inputs")) {
          rec.inputs.emplace_back(component_from_string(ij.at(0).get<std::string>()), ij.at(1).get<std::uint32_t>());
        }
        rec.output_seq = m.seq;
        rec.t = m.t_pub;
        auto& r = lt.trace.row(m.component);
        if (m.seq != r.size() + 1) throw ParseError("non-dense seq");
        r.push_back(std::move(m));
        lt.trace.executions.push_back(std::move(rec));
      } else if (type == "ego") {
        EgoState e;
        e.t = j.at("t").get<SimTime>();
        e.p = vec(j.at("p"), "p");
        e.heading = j.at("heading").get<double>();
        e.speed = j.at("speed").get<double>();
        e.accel = j.at("accel").get<double>();
        lt.trace.ego_log.push_back(e);
      } else if (type == "verdict") {
        lt.trace.verdict = verdict_from_json(j.at("verdict"));
        lt.trace.collided = j.at("collided").get<bool>();
        lt.trace.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
        have_verdict = true;
      } else {
        throw ParseError("unknown record type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw ParseError("trace line " + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw ParseError("trace line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_header) throw ParseError("trace has no header");
  if (!have_verdict) throw ParseError("trace is truncated (no verdict record)");
  return lt;
}

LoadedTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open trace " + path.string());
  return parse_trace(in);
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return out.str();
}

std::string trace_digest(const Trace& trace, const Scenario& scenario) {
  return sha256_hex(serialize_trace(trace, scenario));
}

}  // namespace dvca
