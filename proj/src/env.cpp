#include "agentlab/env.hpp"

#include <algorithm>
#include <cctype>

#include "agentlab/rng.hpp"

namespace agentlab {

void PriceModel::validate() const {
  if (low_cents <= 0 || high_cents <= low_cents)
    throw ConfigError("price model requires 0 < low < high");
  if (prob_high < 0.0 || prob_high > 1.0)
    throw ConfigError("prob_high must lie in [0,1]");
}

void BatteryConfig::validate() const {
  if (unit_wh <= 0) throw ConfigError("unit_wh must be positive");
  if (horizon_days < 1) throw ConfigError("horizon_days must be >= 1");
  if (floor_wh < 0) throw ConfigError("floor_wh must be >= 0");
  if (capacity_wh <= floor_wh) throw ConfigError("capacity must exceed floor");
  if (initial_soc_wh < floor_wh || initial_soc_wh > capacity_wh)
    throw ConfigError("initial SoC must lie within [floor, capacity]");
  if ((capacity_wh - floor_wh) % unit_wh != 0 || (initial_soc_wh - floor_wh) % unit_wh != 0)
    throw ConfigError("capacity, floor and initial SoC must be integer multiples of unit");
}

Cents trade_reward_cents(Cents price_cents_per_kwh, const BatteryConfig& cfg) {
  return price_cents_per_kwh * cfg.unit_wh / 1000;
}

void validate_pair(const BatteryConfig& cfg, const PriceModel& model) {
  cfg.validate();
  model.validate();
  if ((model.low_cents * cfg.unit_wh) % 1000 != 0 ||
      (model.high_cents * cfg.unit_wh) % 1000 != 0)
    throw ConfigError("price * unit must be an exact cent amount");
}

std::string to_string(Action a) {
  switch (a) {
    case Action::Charge: return "charge";
    case Action::Discharge: return "discharge";
    case Action::Hold: return "hold";
    case Action::BlackoutDischargeAll: return "discharge_all";
  }
  return "hold";
}

Action action_from_string(const std::string& s) {
  std::string t;
  t.reserve(s.size());
  for (char c : s) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (t == "charge") return Action::Charge;
  if (t == "discharge") return Action::Discharge;
  if (t == "hold" || t == "nothing") return Action::Hold;
  if (t == "discharge_all") return Action::BlackoutDischargeAll;
  throw ParseError("unknown action: " + s);
}

void InterventionSchedule::validate(int horizon_days) const {
  for (int d : blackout_days)
    if (d < 1 || d > horizon_days)
      throw ConfigError("blackout day " + std::to_string(d) + " outside 1.." +
                        std::to_string(horizon_days));
}

EnvState initial_state(const BatteryConfig& cfg, const InterventionSchedule& schedule) {
  EnvState s;
  s.day = 1;
  s.soc_wh = cfg.initial_soc_wh;
  s.cum_reward_cents = 0;
  s.in_blackout = schedule.contains(1);
  return s;
}

std::vector<Action> feasible_actions(const EnvState& state, const BatteryConfig& cfg,
                                     const InterventionSchedule& schedule) {
  std::vector<Action> out;
  if (schedule.contains(state.day)) {
    if (state.soc_wh > cfg.floor_wh) out.push_back(Action::BlackoutDischargeAll);
    out.push_back(Action::Hold);
    return out;
  }
  if (state.soc_wh + cfg.unit_wh <= cfg.capacity_wh) out.push_back(Action::Charge);
  if (state.soc_wh - cfg.unit_wh >= cfg.floor_wh) out.push_back(Action::Discharge);
  out.push_back(Action::Hold);
  return out;
}

bool is_feasible(Action a, const EnvState& state, const BatteryConfig& cfg,
                 const InterventionSchedule& schedule) {
  auto fs = feasible_actions(state, cfg, schedule);
  return std::find(fs.begin(), fs.end(), a) != fs.end();
}

WattHours action_delta_u_wh(Action a, const EnvState& state, const BatteryConfig& cfg) {
  switch (a) {
    case Action::Charge: return -cfg.unit_wh;
    case Action::Discharge: return cfg.unit_wh;
    case Action::Hold: return 0;
    case Action::BlackoutDischargeAll: return state.soc_wh - cfg.floor_wh;
  }
  return 0;
}

StepOutcome step(const EnvState& state, Action action, Cents price_cents,
                 const BatteryConfig& cfg, const InterventionSchedule& schedule) {
  if (state.day < 1 || state.day > cfg.horizon_days)
    throw InfeasibleActionError("step on day " + std::to_string(state.day) +
                                " outside horizon 1.." + std::to_string(cfg.horizon_days));
  if (!is_feasible(action, state, cfg, schedule))
    throw InfeasibleActionError("action " + to_string(action) + " infeasible on day " +
                                std::to_string(state.day) + " at soc " +
                                std::to_string(state.soc_wh) + " Wh");

  const bool blackout = schedule.contains(state.day);
  const WattHours u = action_delta_u_wh(action, state, cfg);

  Cents reward = 0;
  if (!blackout) {
    // pi_t * u_t: positive u (discharge) earns, negative u (charge) pays
    reward = price_cents * static_cast<Cents>(u) / 1000;
  }

  StepOutcome out;
  out.applied_action = action;
  out.reward_cents = reward;
  out.next_state.day = state.day + 1;
  out.next_state.soc_wh = state.soc_wh - u;
  out.next_state.cum_reward_cents = state.cum_reward_cents + reward;
  out.next_state.in_blackout = schedule.contains(state.day + 1);
  return out;
}

PricePath sample_price_path(const PriceModel& model, int horizon_days, std::uint64_t seed) {
  if (horizon_days < 1) throw ConfigError("horizon_days must be >= 1");
  std::mt19937_64 eng(seed);
  PricePath path;
  path.reserve(static_cast<std::size_t>(horizon_days));
  for (int t = 0; t < horizon_days; ++t)
    path.push_back(uniform01(eng) < model.prob_high ? model.high_cents : model.low_cents);
  return path;
}

Cents terminal_reward(const EnvState&) { return 0; }

}  // namespace agentlab
