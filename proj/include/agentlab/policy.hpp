#pragma once

#include <memory>
#include <string>
#include <vector>

#include "agentlab/env.hpp"

namespace agentlab {

// A decision rule over (day, soc, observed price). The actor sees today's
// price before acting; expectations inside the solver are over tomorrow's.
struct Policy {
  virtual ~Policy() = default;
  virtual Action decide(int day, WattHours soc_wh, Cents price_cents) const = 0;
  virtual std::string name() const = 0;
};

// Charge at the low price, sell at the high price, within bounds.
Action greedy_action(Cents price_cents, WattHours soc_wh, const BatteryConfig& cfg,
                     const PriceModel& model);

struct GreedyPolicy final : Policy {
  BatteryConfig cfg;
  PriceModel model;
  GreedyPolicy(const BatteryConfig& c, const PriceModel& m) : cfg(c), model(m) {}
  Action decide(int, WattHours soc_wh, Cents price_cents) const override {
    return greedy_action(price_cents, soc_wh, cfg, model);
  }
  std::string name() const override { return "greedy"; }
};

struct HoldPolicy final : Policy {
  Action decide(int, WattHours, Cents) const override { return Action::Hold; }
  std::string name() const override { return "hold"; }
};

// Value/argmax tables from backward induction, indexed [day][soc level][price
// level] with price level 0 = low, 1 = high. Day T+1 rows exist and are zero.
class DpSolution {
 public:
  DpSolution(BatteryConfig cfg, PriceModel model);

  double value(int day, int soc_level, int price_level) const {
    return values_[vindex(day, soc_level, price_level)];
  }
  Action action(int day, int soc_level, int price_level) const {
    return actions_[aindex(day, soc_level, price_level)];
  }
  Action action_for(int day, WattHours soc_wh, Cents price_cents) const;

  const BatteryConfig& cfg() const { return cfg_; }
  const PriceModel& model() const { return model_; }

  // Expected optimal reward from the start state, before day 1's price is seen.
  double expected_start_value_cents() const;

  std::string to_json_string() const;
  static DpSolution from_json_string(const std::string& text);

 private:
  DpSolution() = default;
  std::size_t vindex(int day, int soc_level, int price_level) const;
  std::size_t aindex(int day, int soc_level, int price_level) const;
  void solve();

  BatteryConfig cfg_;
  PriceModel model_;
  std::vector<double> values_;   // (T+1) x levels x 2
  std::vector<Action> actions_;  // T x levels x 2
};

// Backward induction over the full discrete (day, soc, price) space.
// Ties resolve Discharge > Hold > Charge so the table is deterministic.
std::shared_ptr<const DpSolution> solve_dp(const BatteryConfig& cfg, const PriceModel& model);

struct DpTablePolicy final : Policy {
  std::shared_ptr<const DpSolution> solution;
  explicit DpTablePolicy(std::shared_ptr<const DpSolution> s) : solution(std::move(s)) {}
  Action decide(int day, WattHours soc_wh, Cents price_cents) const override {
    return solution->action_for(day, soc_wh, price_cents);
  }
  std::string name() const override { return "dp"; }
};

// E[sum pi_t u_t] under the policy, by propagating the exact state
// distribution forward. No sampling noise; with dyadic prob_high the result
// is exact in double arithmetic.
double exact_expected_reward(const Policy& policy, const BatteryConfig& cfg,
                             const PriceModel& model);

struct Rollout {
  std::vector<EnvState> states;  // length T+1: state entering each day, then terminal
  std::vector<Action> actions;   // length T
  Cents reward_cents = 0;
};

// Deterministic rollout of a policy against a fixed price path (no blackouts;
// market scenarios are blackout-free).
Rollout evaluate_on_path(const Policy& policy, const PricePath& path, const BatteryConfig& cfg);

enum class ComplexityLabel { Easy, Medium, Hard };
std::string to_string(ComplexityLabel label);

// Thresholds separating the label buckets.
inline constexpr double kEasyMediumRho = 0.3;
inline constexpr double kMediumHardRho = 0.8;
ComplexityLabel classify_rho(double rho);

struct ComplexityReport {
  double rho = 0.0;
  Cents r_dp_cents = 0;
  Cents r_greedy_cents = 0;
  ComplexityLabel label = ComplexityLabel::Easy;
  PricePath path;
  bool negative_greedy = false;  // rho > 1 is possible on such paths; flagged, kept raw
};

// rho on a fixed path from realized rollout rewards of both policies.
// Throws DegenerateScenario when the DP rollout earns nothing.
ComplexityReport complexity_rho(const PricePath& path, const BatteryConfig& cfg,
                                const PriceModel& model);
ComplexityReport complexity_rho(const PricePath& path, const DpSolution& solution);

// rho on the stochastic model itself, from exact expectations.
double expected_rho(const BatteryConfig& cfg, const PriceModel& model);

}  // namespace agentlab
