#include "agentlab/runspec.hpp"

#include <cmath>

#include "json.hpp"

namespace agentlab {

std::string to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::Dp: return "dp";
    case PolicyKind::Greedy: return "greedy";
    case PolicyKind::Agent: return "agent";
  }
  return "greedy";
}

PolicyKind policy_kind_from_string(const std::string& s) {
  if (s == "dp") return PolicyKind::Dp;
  if (s == "greedy") return PolicyKind::Greedy;
  if (s == "agent") return PolicyKind::Agent;
  throw ConfigError("unknown policy kind: " + s);
}

void RunSpec::validate() const {
  if (run_id.empty()) throw ConfigError("run_id must be non-empty");
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  validate_pair(cfg, model);
  intervention.validate(cfg.horizon_days);
  if (scenario.kind == Scenario::Kind::FixedPath &&
      static_cast<int>(scenario.fixed_path.size()) != cfg.horizon_days)
    throw ConfigError("fixed path length must equal the horizon");
  if (policy_kind == PolicyKind::Agent) {
    if (persona_id.empty()) throw ConfigError("agent runs need a persona");
    if (backend_spec.empty()) throw ConfigError("agent runs need a backend");
  }
}

std::string runspec_to_json_string(const RunSpec& spec) {
  nlohmann::ordered_json j;
  j["run_id"] = spec.run_id;
  if (spec.scenario.kind == Scenario::Kind::FixedPath) {
    j["scenario"] = {{"kind", "fixed_path"}, {"prices_cents", spec.scenario.fixed_path}};
  } else {
    j["scenario"] = {{"kind", "sampled"}, {"path_seed", spec.scenario.path_seed}};
  }
  j["policy_kind"] = to_string(spec.policy_kind);
  j["persona_id"] = spec.persona_id;
  j["backend_spec"] = spec.backend_spec;
  j["repetitions"] = spec.repetitions;
  j["blackout_days"] = spec.intervention.blackout_days;
  j["base_seed"] = spec.base_seed;
  j["battery"] = {{"capacity_kwh", spec.cfg.capacity_wh / 1000.0},
                  {"floor_kwh", spec.cfg.floor_wh / 1000.0},
                  {"initial_soc_kwh", spec.cfg.initial_soc_wh / 1000.0},
                  {"unit_kwh", spec.cfg.unit_wh / 1000.0},
                  {"horizon_days", spec.cfg.horizon_days}};
  j["prices"] = {{"low_cents", spec.model.low_cents},
                 {"high_cents", spec.model.high_cents},
                 {"prob_high", spec.model.prob_high}};
  j["workers"] = spec.workers;
  return j.dump();
}

RunSpec runspec_from_json_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad run spec: ") + e.what());
  }
  RunSpec spec;
  spec.run_id = j.at("run_id").get<std::string>();
  const auto& sc = j.at("scenario");
  if (sc.at("kind") == "fixed_path") {
    spec.scenario = Scenario::fixed(sc.at("prices_cents").get<PricePath>());
  } else {
    spec.scenario = Scenario::sampled(sc.at("path_seed").get<std::uint64_t>());
  }
  spec.policy_kind = policy_kind_from_string(j.at("policy_kind").get<std::string>());
  spec.persona_id = j.value("persona_id", "");
  spec.backend_spec = j.value("backend_spec", "");
  spec.repetitions = j.at("repetitions").get<int>();
  for (int d : j.at("blackout_days")) spec.intervention.blackout_days.insert(d);
  spec.base_seed = j.at("base_seed").get<std::uint64_t>();
  const auto& b = j.at("battery");
  spec.cfg.capacity_wh = static_cast<WattHours>(std::llround(b.at("capacity_kwh").get<double>() * 1000));
  spec.cfg.floor_wh = static_cast<WattHours>(std::llround(b.at("floor_kwh").get<double>() * 1000));
  spec.cfg.initial_soc_wh =
      static_cast<WattHours>(std::llround(b.at("initial_soc_kwh").get<double>() * 1000));
  spec.cfg.unit_wh = static_cast<WattHours>(std::llround(b.at("unit_kwh").get<double>() * 1000));
  spec.cfg.horizon_days = b.at("horizon_days").get<int>();
  const auto& m = j.at("prices");
  spec.model.low_cents = m.at("low_cents").get<Cents>();
  spec.model.high_cents = m.at("high_cents").get<Cents>();
  spec.model.prob_high = m.at("prob_high").get<double>();
  spec.workers = j.value("workers", 4);
  spec.validate();
  return spec;
}

}  // namespace agentlab
