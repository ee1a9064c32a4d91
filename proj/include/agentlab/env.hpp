#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "agentlab/errors.hpp"

namespace agentlab {

// Money is integer cents throughout; energy is integer watt-hours.
// This keeps reward accounting exact: the conservation tests run at zero
// tolerance and would catch any float drift.
using Cents = std::int64_t;
using WattHours = int;

struct PriceModel {
  Cents low_cents = 500;    // $5/kWh
  Cents high_cents = 1000;  // $10/kWh
  double prob_high = 0.5;

  void validate() const;
};

// Realized price per day, cents per kWh, length = horizon.
using PricePath = std::vector<Cents>;

struct BatteryConfig {
  WattHours capacity_wh = 10000;
  WattHours floor_wh = 0;
  WattHours initial_soc_wh = 5000;
  WattHours unit_wh = 1000;  // energy moved by one charge/discharge
  int horizon_days = 20;

  void validate() const;

  // Number of reachable SoC levels, floor..capacity inclusive.
  int levels() const { return (capacity_wh - floor_wh) / unit_wh + 1; }
  int level_of(WattHours soc_wh) const { return (soc_wh - floor_wh) / unit_wh; }
  WattHours soc_at_level(int level) const { return floor_wh + level * unit_wh; }
};

// Cost/revenue of moving one unit at the given per-kWh price.
// Requires price*unit to be an exact cent amount (validated with the config).
Cents trade_reward_cents(Cents price_cents_per_kwh, const BatteryConfig& cfg);

void validate_pair(const BatteryConfig& cfg, const PriceModel& model);

enum class Action {
  Charge,               // buy one unit from the grid
  Discharge,            // sell one unit to the grid
  Hold,                 // do nothing
  BlackoutDischargeAll  // dump everything into the household, blackout days only
};

std::string to_string(Action a);
Action action_from_string(const std::string& s);  // throws ParseError

struct InterventionSchedule {
  std::set<int> blackout_days;  // 1-based day indices

  bool contains(int day) const { return blackout_days.count(day) > 0; }
  bool empty() const { return blackout_days.empty(); }
  void validate(int horizon_days) const;

  static InterventionSchedule none() { return {}; }
  static InterventionSchedule treatment_default() { return {{8, 9}}; }
};

struct EnvState {
  int day = 1;  // 1..T+1; T+1 is terminal
  WattHours soc_wh = 0;
  Cents cum_reward_cents = 0;
  bool in_blackout = false;  // whether `day` itself is a blackout day
};

EnvState initial_state(const BatteryConfig& cfg, const InterventionSchedule& schedule);

struct StepOutcome {
  EnvState next_state;
  Cents reward_cents = 0;
  Action applied_action = Action::Hold;
};

// Actions that keep SoC within [floor, capacity] on a normal day; on a
// blackout day the grid is gone, leaving {BlackoutDischargeAll, Hold}
// (dump omitted when already at the floor).
std::vector<Action> feasible_actions(const EnvState& state, const BatteryConfig& cfg,
                                     const InterventionSchedule& schedule);

bool is_feasible(Action a, const EnvState& state, const BatteryConfig& cfg,
                 const InterventionSchedule& schedule);

// SoC change applied by an action: s' = s - u, u>0 means discharging.
WattHours action_delta_u_wh(Action a, const EnvState& state, const BatteryConfig& cfg);

// Applies one day. Throws InfeasibleActionError if the action is not in
// feasible_actions(state) — infeasible requests are bugs upstream, never clamped.
StepOutcome step(const EnvState& state, Action action, Cents price_cents,
                 const BatteryConfig& cfg, const InterventionSchedule& schedule);

// T iid draws from the two-level price model; same seed, same path.
PricePath sample_price_path(const PriceModel& model, int horizon_days, std::uint64_t seed);

// Leftover energy is worth nothing at the end of the horizon.
Cents terminal_reward(const EnvState& state);

}  // namespace agentlab
