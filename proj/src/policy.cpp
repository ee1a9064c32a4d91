#include "agentlab/policy.hpp"

#include <array>
#include <cmath>

#include "agentlab/version.hpp"
#include "json.hpp"

namespace agentlab {

Action greedy_action(Cents price_cents, WattHours soc_wh, const BatteryConfig& cfg,
                     const PriceModel& model) {
  if (price_cents == model.low_cents && soc_wh + cfg.unit_wh <= cfg.capacity_wh)
    return Action::Charge;
  if (price_cents == model.high_cents && soc_wh - cfg.unit_wh >= cfg.floor_wh)
    return Action::Discharge;
  return Action::Hold;
}

DpSolution::DpSolution(BatteryConfig cfg, PriceModel model)
    : cfg_(std::move(cfg)), model_(std::move(model)) {
  validate_pair(cfg_, model_);
  solve();
}

std::size_t DpSolution::vindex(int day, int soc_level, int price_level) const {
  return (static_cast<std::size_t>(day - 1) * cfg_.levels() + soc_level) * 2 + price_level;
}

std::size_t DpSolution::aindex(int day, int soc_level, int price_level) const {
  return vindex(day, soc_level, price_level);
}

void DpSolution::solve() {
  const int T = cfg_.horizon_days;
  const int L = cfg_.levels();
  const double p = model_.prob_high;
  const std::array<Cents, 2> price = {model_.low_cents, model_.high_cents};

  values_.assign(static_cast<std::size_t>(T + 1) * L * 2, 0.0);
  actions_.assign(static_cast<std::size_t>(T) * L * 2, Action::Hold);

  // E over tomorrow's price of V_{t+1}(s, .)
  std::vector<double> expected_next(L, 0.0);

  for (int day = T; day >= 1; --day) {
    for (int s = 0; s < L; ++s)
      expected_next[s] =
          (1.0 - p) * value(day + 1, s, 0) + p * value(day + 1, s, 1);

    for (int s = 0; s < L; ++s) {
      for (int pl = 0; pl < 2; ++pl) {
        const Cents trade = trade_reward_cents(price[pl], cfg_);
        // tie order: Discharge > Hold > Charge
        double best = -1e300;
        Action best_action = Action::Hold;
        if (s > 0) {
          double v = static_cast<double>(trade) + expected_next[s - 1];
          if (v > best) { best = v; best_action = Action::Discharge; }
        }
        {
          double v = expected_next[s];
          if (v > best) { best = v; best_action = Action::Hold; }
        }
        if (s + 1 < L) {
          double v = -static_cast<double>(trade) + expected_next[s + 1];
          if (v > best) { best = v; best_action = Action::Charge; }
        }
        values_[vindex(day, s, pl)] = best;
        actions_[aindex(day, s, pl)] = best_action;
      }
    }
  }
}

Action DpSolution::action_for(int day, WattHours soc_wh, Cents price_cents) const {
  const int pl = price_cents == model_.high_cents ? 1 : 0;
  return action(day, cfg_.level_of(soc_wh), pl);
}

double DpSolution::expected_start_value_cents() const {
  const int s0 = cfg_.level_of(cfg_.initial_soc_wh);
  return (1.0 - model_.prob_high) * value(1, s0, 0) + model_.prob_high * value(1, s0, 1);
}

std::shared_ptr<const DpSolution> solve_dp(const BatteryConfig& cfg, const PriceModel& model) {
  return std::make_shared<DpSolution>(cfg, model);
}

double exact_expected_reward(const Policy& policy, const BatteryConfig& cfg,
                             const PriceModel& model) {
  validate_pair(cfg, model);
  const int T = cfg.horizon_days;
  const int L = cfg.levels();
  const double p = model.prob_high;
  const std::array<Cents, 2> price = {model.low_cents, model.high_cents};
  const std::array<double, 2> prob = {1.0 - p, p};

  std::vector<double> dist(L, 0.0);
  dist[cfg.level_of(cfg.initial_soc_wh)] = 1.0;

  const InterventionSchedule no_blackouts;
  double expected = 0.0;
  for (int day = 1; day <= T; ++day) {
    std::vector<double> next(L, 0.0);
    for (int s = 0; s < L; ++s) {
      if (dist[s] == 0.0) continue;
      for (int pl = 0; pl < 2; ++pl) {
        EnvState state;
        state.day = day;
        state.soc_wh = cfg.soc_at_level(s);
        const Action a = policy.decide(day, state.soc_wh, price[pl]);
        const StepOutcome out = step(state, a, price[pl], cfg, no_blackouts);
        const double w = dist[s] * prob[pl];
        expected += w * static_cast<double>(out.reward_cents);
        next[cfg.level_of(out.next_state.soc_wh)] += w;
      }
    }
    dist.swap(next);
  }
  return expected;
}

Rollout evaluate_on_path(const Policy& policy, const PricePath& path, const BatteryConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(path.size()) != cfg.horizon_days)
    throw ConfigError("price path length " + std::to_string(path.size()) +
                      " does not match horizon " + std::to_string(cfg.horizon_days));

  const InterventionSchedule no_blackouts;
  Rollout r;
  EnvState state = initial_state(cfg, no_blackouts);
  r.states.push_back(state);
  for (int day = 1; day <= cfg.horizon_days; ++day) {
    const Cents price = path[static_cast<std::size_t>(day - 1)];
    const Action a = policy.decide(day, state.soc_wh, price);
    const StepOutcome out = step(state, a, price, cfg, no_blackouts);
    r.actions.push_back(out.applied_action);
    state = out.next_state;
    r.states.push_back(state);
  }
  r.reward_cents = state.cum_reward_cents;
  return r;
}

std::string to_string(ComplexityLabel label) {
  switch (label) {
    case ComplexityLabel::Easy: return "easy";
    case ComplexityLabel::Medium: return "medium";
    case ComplexityLabel::Hard: return "hard";
  }
  return "easy";
}

ComplexityLabel classify_rho(double rho) {
  if (rho < kEasyMediumRho) return ComplexityLabel::Easy;
  if (rho < kMediumHardRho) return ComplexityLabel::Medium;
  return ComplexityLabel::Hard;
}

ComplexityReport complexity_rho(const PricePath& path, const BatteryConfig& cfg,
                                const PriceModel& model) {
  return complexity_rho(path, *solve_dp(cfg, model));
}

ComplexityReport complexity_rho(const PricePath& path, const DpSolution& solution) {
  const BatteryConfig& cfg = solution.cfg();
  DpTablePolicy dp(std::shared_ptr<const DpSolution>(&solution, [](const DpSolution*) {}));
  GreedyPolicy greedy(cfg, solution.model());

  ComplexityReport rep;
  rep.path = path;
  rep.r_dp_cents = evaluate_on_path(dp, path, cfg).reward_cents;
  rep.r_greedy_cents = evaluate_on_path(greedy, path, cfg).reward_cents;
  if (rep.r_dp_cents <= 0)
    throw DegenerateScenario("rho undefined: DP rollout earned " +
                             std::to_string(rep.r_dp_cents) + " cents on this path");
  rep.rho = static_cast<double>(rep.r_dp_cents - rep.r_greedy_cents) /
            static_cast<double>(rep.r_dp_cents);
  rep.negative_greedy = rep.r_greedy_cents < 0;
  rep.label = classify_rho(rep.rho);
  return rep;
}

double expected_rho(const BatteryConfig& cfg, const PriceModel& model) {
  auto solution = solve_dp(cfg, model);
  DpTablePolicy dp(solution);
  GreedyPolicy greedy(cfg, model);
  const double e_dp = exact_expected_reward(dp, cfg, model);
  const double e_greedy = exact_expected_reward(greedy, cfg, model);
  if (e_dp <= 0.0) throw DegenerateScenario("rho undefined: E[r_dp] <= 0");
  return (e_dp - e_greedy) / e_dp;
}

namespace {

nlohmann::ordered_json config_to_json(const BatteryConfig& cfg) {
  return {{"capacity_kwh", cfg.capacity_wh / 1000.0},
          {"floor_kwh", cfg.floor_wh / 1000.0},
          {"initial_soc_kwh", cfg.initial_soc_wh / 1000.0},
          {"unit_kwh", cfg.unit_wh / 1000.0},
          {"horizon_days", cfg.horizon_days}};
}

nlohmann::ordered_json model_to_json(const PriceModel& model) {
  return {{"low_cents", model.low_cents},
          {"high_cents", model.high_cents},
          {"prob_high", model.prob_high}};
}

}  // namespace

std::string DpSolution::to_json_string() const {
  nlohmann::ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = "dp_solution";
  doc["battery"] = config_to_json(cfg_);
  doc["prices"] = model_to_json(model_);
  doc["index_space"] = {{"days", cfg_.horizon_days + 1},
                        {"soc_levels", cfg_.levels()},
                        {"price_levels", 2},
                        {"order", "day-major, then soc level, then price level (low, high)"}};
  doc["values_cents"] = values_;
  nlohmann::ordered_json acts = nlohmann::ordered_json::array();
  for (Action a : actions_) acts.push_back(to_string(a));
  doc["actions"] = std::move(acts);
  return doc.dump(2);
}

DpSolution DpSolution::from_json_string(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad dp_solution document: ") + e.what());
  }
  if (!doc.contains("schema_version") || doc["schema_version"].get<int>() != kSchemaVersion)
    throw VersionMismatch("dp_solution schema_version mismatch");
  if (doc.value("kind", "") != "dp_solution")
    throw ParseError("document is not a dp_solution");

  DpSolution s;
  const auto& b = doc.at("battery");
  s.cfg_.capacity_wh = static_cast<WattHours>(std::llround(b.at("capacity_kwh").get<double>() * 1000));
  s.cfg_.floor_wh = static_cast<WattHours>(std::llround(b.at("floor_kwh").get<double>() * 1000));
  s.cfg_.initial_soc_wh =
      static_cast<WattHours>(std::llround(b.at("initial_soc_kwh").get<double>() * 1000));
  s.cfg_.unit_wh = static_cast<WattHours>(std::llround(b.at("unit_kwh").get<double>() * 1000));
  s.cfg_.horizon_days = b.at("horizon_days").get<int>();
  const auto& m = doc.at("prices");
  s.model_.low_cents = m.at("low_cents").get<Cents>();
  s.model_.high_cents = m.at("high_cents").get<Cents>();
  s.model_.prob_high = m.at("prob_high").get<double>();
  validate_pair(s.cfg_, s.model_);

  s.values_ = doc.at("values_cents").get<std::vector<double>>();
  for (const auto& a : doc.at("actions")) s.actions_.push_back(action_from_string(a.get<std::string>()));

  const std::size_t want_v = static_cast<std::size_t>(s.cfg_.horizon_days + 1) * s.cfg_.levels() * 2;
  const std::size_t want_a = static_cast<std::size_t>(s.cfg_.horizon_days) * s.cfg_.levels() * 2;
  if (s.values_.size() != want_v || s.actions_.size() != want_a)
    throw ParseError("dp_solution table sizes do not match the index space");
  return s;
}

}  // namespace agentlab
