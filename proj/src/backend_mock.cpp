#include <algorithm>
#include <array>
#include <sstream>

#include "agentlab/backend.hpp"
#include "agentlab/rng.hpp"
#include "json.hpp"

namespace agentlab {

namespace {

// Persona vocabularies. The tokens are deliberately distinctive so the
// offline clustering pipeline has separable material to work with.
const std::vector<std::string>& bank_for(const std::string& persona_id, bool cautious) {
  static const std::vector<std::string> thinker = {
      "profit", "earnings", "selling",     "strategy", "maximize", "margin",
      "arbitrage", "optimal", "calculation", "spread",   "expected", "payoff"};
  static const std::vector<std::string> realist = {
      "balance", "budget", "reserves", "preparedness", "steady",   "practical",
      "cost",    "cashflow", "prudent", "planning",     "sensible", "groundwork"};
  static const std::vector<std::string> feeler = {
      "feels", "intuition", "warmth", "journey", "flow",     "heart",
      "comfort", "sharing",  "glow",   "peace",   "instinct", "embrace"};
  static const std::vector<std::string> cautious_bank = {
      "caution", "reserve", "backup",     "safety",  "precaution", "security",
      "outage",  "protect", "resilience", "buffer",  "vigilance",  "contingency"};
  if (cautious) return cautious_bank;
  if (persona_id == "realist") return realist;
  if (persona_id == "feeler") return feeler;
  return thinker;
}

// Single-token action words keep the persona vocabulary dominant in the
// TF-IDF geometry; none of them appear in any phrase bank.
std::string action_phrase(Action a) {
  switch (a) {
    case Action::Charge: return "buying";
    case Action::Discharge: return "offloading";
    case Action::Hold: return "waiting";
    case Action::BlackoutDischargeAll: return "powering the house";
  }
  return "waiting";
}

std::string pick(const std::vector<std::string>& bank, std::mt19937_64& eng) {
  return bank[static_cast<std::size_t>(eng() % bank.size())];
}

std::string fmt_price(Cents cents) {
  std::ostringstream os;
  os << cents / 100;
  if (cents % 100) os << '.' << (cents % 100 < 10 ? "0" : "") << cents % 100;
  return os.str();
}

}  // namespace

MockBackend::MockBackend(MockScript script, BatteryConfig cfg, PriceModel model,
                         std::uint64_t seed, std::string id)
    : script_(std::move(script)), cfg_(std::move(cfg)), model_(std::move(model)), seed_(seed),
      id_(std::move(id)) {}

Action MockBackend::decide(const PromptContext& ctx) {
  auto feasible = [&](Action a) {
    return std::find(ctx.feasible.begin(), ctx.feasible.end(), a) != ctx.feasible.end();
  };

  if (ctx.in_blackout)
    return feasible(script_.blackout_action) ? script_.blackout_action : Action::Hold;

  auto greedy = [&] { return greedy_action(ctx.price_cents, ctx.soc_wh, cfg_, model_); };

  switch (script_.kind) {
    case MockScript::Kind::Greedy:
      return greedy();
    case MockScript::Kind::Hold:
      return Action::Hold;
    case MockScript::Kind::DpTable:
      return script_.dp->action_for(ctx.day, ctx.soc_wh, ctx.price_cents);
    case MockScript::Kind::ReserveKeeper: {
      if (!blackout_seen_) return greedy();
      if (ctx.soc_wh < script_.reserve_floor_wh)
        return feasible(Action::Charge) ? Action::Charge : Action::Hold;
      Action a = greedy();
      if (a == Action::Discharge && ctx.soc_wh - cfg_.unit_wh < script_.reserve_floor_wh)
        return Action::Hold;
      return a;
    }
    case MockScript::Kind::Custom:
      return script_.custom(ctx);
  }
  return Action::Hold;
}

std::string MockBackend::complete(const DailyPrompt& prompt, const ChatBackendParams&) {
  const PromptContext& ctx = prompt.context;
  if (ctx.in_blackout) blackout_seen_ = true;

  const Action action = decide(ctx);
  const bool cautious = script_.shift_phrases_after_blackout && blackout_seen_;
  const auto& bank = bank_for(ctx.persona_id, cautious);

  std::uint64_t h = hash_mix(seed_, static_cast<std::uint64_t>(ctx.day));
  h = hash_mix(h, static_cast<std::uint64_t>(ctx.price_cents));
  h = hash_mix(h, static_cast<std::uint64_t>(ctx.soc_wh));
  h = hash_mix(h, std::hash<std::string>{}(ctx.persona_id));
  h = hash_mix(h, (ctx.in_blackout ? 2ULL : 0ULL) + (cautious ? 1ULL : 0ULL));
  std::mt19937_64 eng(h);

  const std::string price = fmt_price(ctx.price_cents);
  const std::string soc = std::to_string(ctx.soc_wh / 1000);
  const std::string act = action_phrase(action);
  const std::string w1 = pick(bank, eng), w2 = pick(bank, eng), w3 = pick(bank, eng),
                    w4 = pick(bank, eng), w5 = pick(bank, eng), w6 = pick(bank, eng);

  // Each picked word appears exactly twice so the persona vocabulary, not the
  // numeric or action glue, carries the document's weight in cluster space.
  std::ostringstream thoughts, reflection, journal;
  if (ctx.in_blackout) {
    thoughts << "Day " << ctx.day << ", grid down, " << soc << " kWh stored: " << w1
             << " and " << w2 << " speak loudest, and " << w3 << " weighs in.";
  } else {
    thoughts << "Day " << ctx.day << " at " << price << " with " << soc << " kWh stored: "
             << w1 << " and " << w2 << " speak loudest, and " << w3 << " weighs in.";
  }
  reflection << "Today " << act << " honors " << w4 << " and " << w2 << ", while " << w1
             << " leans toward " << w5 << ".";
  journal << "Chose " << act << "; " << w3 << " with " << w5 << ", then " << w6 << " and "
          << w4 << "; " << w6 << " stays the guide.";

  nlohmann::ordered_json reply;
  reply["thoughts"] = thoughts.str();
  reply["action"] = to_string(action);
  reply["reflection"] = reflection.str();
  reply["journal"] = journal.str();
  return reply.dump();
}

}  // namespace agentlab
