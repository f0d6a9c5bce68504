#include "dvca/simulator.hpp"

#include <array>
#include <exception>

#include "dvca/errors.hpp"

namespace dvca {

namespace {

constexpr std::array<ComponentId, 0> kNoInputs{};
constexpr std::array<ComponentId, 1> kPredictionInputs{ComponentId::Perception};
constexpr std::array<ComponentId, 3> kPlanningInputs{ComponentId::Perception, ComponentId::Prediction,
                                                     ComponentId::Localization};
constexpr std::array<ComponentId, 2> kControlInputs{ComponentId::Planning, ComponentId::Localization};

std::span<const ComponentId> inputs_of(ComponentId c) {
  switch (c) {
    case ComponentId::Prediction:
      return kPredictionInputs;
    case ComponentId::Planning:
      return kPlanningInputs;
    case ComponentId::Control:
      return kControlInputs;
    default:
      return kNoInputs;
  }
}

template <typename T>
const T* latest_payload(const Bus& bus, ComponentId c) {
  const Message* m = bus.latest(c);
  return m ? &std::get<T>(m->payload) : nullptr;
}

std::optional<int> contact(const Scenario& sc, const EgoState& ego) {
  const OrientedBox eb = ego_box(ego, sc.ego_size);
  const double er = eb.half_extents.norm();
  for (const auto& obj : sc.objects) {
    const OrientedBox ob = bbox_at(obj, ego.t);
    if ((ob.center - eb.center).norm() > er + ob.half_extents.norm()) continue;
    if (boxes_overlap(eb, ob)) return obj.id;
  }
  return std::nullopt;
}

}  // namespace

Trace run_scheduler(const Scenario& sc, const AdsConfig& cfg, const RunHooks& hooks) {
  hooks.plan.validate();
  for (auto c : kAllComponents) {
    const SimTime p = cfg.period_of(c);
    if (p <= 0 || p % kEgoSamplePeriod != 0) {
      throw ValidationError("/ads/period/" + std::string(to_string(c)), "must be a positive multiple of 10 ms");
    }
  }
  Trace trace;
  trace.scenario_name = sc.name;
  Bus bus(trace);
  SubstitutionState subst(hooks.plan, hooks.units);

  EgoState ego{sc.ego_init.p, sc.ego_init.heading, 0.0, 0.0, 0};
  ControlOut cmd{};
  bool sim_control = false;

  for (SimTime t = 0;; ++t) {
    ego.t = t;
    if (t % kEgoSamplePeriod == 0) {
      trace.ego_log.push_back(ego);
      subst.observe(ego);
      if (auto hit = contact(sc, ego)) {
        trace.collided = true;
        trace.diagnostics.push_back("contact with object " + std::to_string(*hit) + " at " + std::to_string(t) + " ms");
        break;
      }
    }
    if (t >= sc.t_max) break;

    for (ComponentId c : kSchedulePriority) {
      if (t % cfg.period_of(c) != 0) continue;
      const bool ideal = subst.ideal(c, t);
      try {
        Payload payload;
        bool affected = false;
        switch (c) {
          case ComponentId::Localization: {
            if (ideal) {
              payload = ideal_localization(ego);
            } else {
              auto r = localization_tick(ego, t, cfg.faults);
              payload = r.out;
              affected = r.fault_affected;
            }
            break;
          }
          case ComponentId::Perception: {
            if (ideal) {
              payload = ideal_perception(sc, t, ego.p, cfg.sensor_range);
            } else {
              const auto truth = ground_truth_objects(sc, t, ego.p, cfg.sensor_range);
              auto r = perception_tick(truth, ego, t, cfg.faults, cfg, stream_seed(sc.seed, c, t));
              payload = std::move(r.out);
              affected = r.fault_affected;
            }
            break;
          }
          case ComponentId::Prediction: {
            if (ideal) {
              payload = ideal_prediction(sc, t, ego.p, cfg.sensor_range, cfg.planner.horizon, cfg.planner.step);
            } else {
              std::vector<PerceptionFrame> frames;
              for (const Message* m : bus.history(ComponentId::Perception, cfg.prediction_history)) {
                frames.push_back({m->t_pub, &std::get<PerceptionOut>(m->payload)});
              }
              auto r = prediction_tick(frames, t, ego.p, cfg.faults, cfg.planner);
              payload = std::move(r.out);
              affected = r.fault_affected;
            }
            break;
          }
          case ComponentId::Planning: {
            const auto* loc = latest_payload<LocalizationOut>(bus, ComponentId::Localization);
            PlanningInput in;
            in.scenario = &sc;
            in.perception = latest_payload<PerceptionOut>(bus, ComponentId::Perception);
            in.prediction = latest_payload<PredictionOut>(bus, ComponentId::Prediction);
            in.localization = loc ? *loc : ideal_localization(ego);
            in.t = t;
            in.trigger_p = ego.p;
            if (cfg.best_effort_planning) {
              payload = best_effort_planning(sc, ego, t, cfg.planner, cfg.vehicle).plan;
            } else {
              auto r = planning_tick(in, cfg.faults, cfg.planner);
              payload = std::move(r.out);
              affected = r.fault_affected;
            }
            break;
          }
          case ComponentId::Control: {
            const auto* plan = latest_payload<PlanningOut>(bus, ComponentId::Planning);
            if (ideal) {
              ControlOut out{};
              if (plan != nullptr && !plan->trajectory.empty()) {
                out.accel_cmd = sim_control_apply(*plan, t, ego).accel;
              }
              payload = out;
              sim_control = true;
            } else {
              const auto* loc = latest_payload<LocalizationOut>(bus, ComponentId::Localization);
              auto r = control_tick(plan, loc ? *loc : ideal_localization(ego), t, ego.p, cfg.faults, cfg);
              payload = r.out;
              affected = r.fault_affected;
              cmd = r.out;
              sim_control = false;
            }
            break;
          }
        }
        const Message& m = bus.publish(c, std::move(payload), t, affected, ideal);
        bus.record_execution(c, inputs_of(c), m);
      } catch (const Error&) {
        throw;
      } catch (const std::exception& e) {
        throw SimPanic(std::string(to_string(c)) + " failed at " + std::to_string(t) + " ms: " + e.what());
      }
    }

    if (sim_control) {
      const auto* plan = latest_payload<PlanningOut>(bus, ComponentId::Planning);
      if (plan == nullptr || plan->trajectory.empty()) {
        ego.speed = 0.0;
        ego.accel = 0.0;
      } else {
        // The ego follows the plan's motion increments from where it really is.
        const EgoState a = sim_control_apply(*plan, t, ego);
        const EgoState b = sim_control_apply(*plan, t + 1, ego);
        ego.p += b.p - a.p;
        ego.heading = wrap_angle(ego.heading + wrap_angle(b.heading - a.heading));
        ego.speed = std::max(0.0, b.speed);
        ego.accel = b.accel;
      }
      ego.t = t + 1;
    } else {
      ego = step_ego(ego, cmd, 1, cfg.vehicle);
    }
  }
  return trace;
}

RunResult rtest(const Scenario& scenario, const AdsConfig& config, const OracleConfig& oracle) {
  RunResult r;
  r.trace = run_scheduler(scenario, config);
  r.verdict = evaluate(r.trace.ego_log, scenario, oracle);
  r.trace.verdict = r.verdict;
  return r;
}

Verdict dtest(const Scenario& scenario, const AdsConfig& config, const SubstitutionPlan& plan,
              const OracleConfig& oracle, const QuantUnits& units) {
  const Trace trace = run_scheduler(scenario, config, RunHooks{plan, units});
  return evaluate(trace.ego_log, scenario, oracle);
}

}  // namespace dvca
