#include "agentlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "agentlab/errors.hpp"
#include "agentlab/version.hpp"

namespace agentlab {

namespace {

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return (v != nullptr && *v != '\0') ? std::string(v) : fallback;
}

MockScript::Kind mock_kind_from_name(const std::string& name) {
  if (name == "greedy") return MockScript::Kind::Greedy;
  if (name == "hold") return MockScript::Kind::Hold;
  if (name == "dp") return MockScript::Kind::DpTable;
  if (name == "reserve") return MockScript::Kind::ReserveKeeper;
  if (name == "shift") return MockScript::Kind::Greedy;
  throw ConfigError("unknown mock backend variant: " + name);
}

}  // namespace

std::shared_ptr<ChatBackend> make_backend(const std::string& backend_spec,
                                          const BatteryConfig& cfg, const PriceModel& model,
                                          std::uint64_t seed, const std::string& http_base_url,
                                          const std::string& http_api_key,
                                          const std::string& http_model) {
  if (backend_spec == "http") {
    const std::string base_url = env_or("AGENTLAB_BASE_URL", http_base_url);
    const std::string api_key = env_or("AGENTLAB_API_KEY", http_api_key);
    if (base_url.empty())
      throw ConfigError("http backend requires a base URL (AGENTLAB_BASE_URL or config)");
    if (api_key.empty()) throw ConfigError("missing AGENTLAB_API_KEY");
    const std::string model_name = http_model.empty() ? "gpt-4o-mini" : http_model;
    return std::make_shared<HttpChatBackend>(base_url, api_key, model_name);
  }

  constexpr const char* kPrefix = "mock:";
  if (backend_spec.rfind(kPrefix, 0) != 0)
    throw ConfigError("unknown backend spec: " + backend_spec +
                      " (expected mock:<variant> or http)");

  // Variant name plus optional '+' modifiers, e.g. "mock:greedy+dischargeall".
  std::string rest = backend_spec.substr(std::string(kPrefix).size());
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto plus = rest.find('+', start);
    parts.push_back(rest.substr(start, plus - start));
    if (plus == std::string::npos) break;
    start = plus + 1;
  }
  if (parts.empty() || parts.front().empty())
    throw ConfigError("mock backend spec is missing a variant: " + backend_spec);

  MockScript script;
  script.kind = mock_kind_from_name(parts.front());
  if (parts.front() == "shift") {
    script.shift_phrases_after_blackout = true;
    script.blackout_action = Action::BlackoutDischargeAll;
  }
  if (parts.front() == "reserve") script.blackout_action = Action::BlackoutDischargeAll;
  if (script.kind == MockScript::Kind::DpTable) script.dp = solve_dp(cfg, model);
  for (std::size_t i = 1; i < parts.size(); ++i) {
    if (parts[i] == "dischargeall")
      script.blackout_action = Action::BlackoutDischargeAll;
    else if (parts[i] == "holdout")
      script.blackout_action = Action::Hold;
    else
      throw ConfigError("unknown mock backend modifier: " + parts[i]);
  }
  return std::make_shared<MockBackend>(script, cfg, model, seed, backend_spec);
}

PricePath path_for_repetition(const RunSpec& spec, int repetition) {
  if (spec.scenario.kind == Scenario::Kind::FixedPath) return spec.scenario.fixed_path;
  return sample_price_path(spec.model, spec.cfg.horizon_days,
                           spec.scenario.path_seed + static_cast<std::uint64_t>(repetition));
}

namespace {

struct RepOutcome {
  bool ok = false;
  std::vector<DayRecord> records;
  Cents terminal_reward_cents = 0;
  WattHours terminal_soc_wh = 0;
  std::vector<WattHours> soc_by_day;  // entering day 1..T, then terminal
  std::string error;
};

DayRecord base_record(const RunSpec& spec, int repetition, std::uint64_t seed) {
  DayRecord r;
  r.schema_version = kSchemaVersion;
  r.run_id = spec.run_id;
  r.repetition = repetition;
  r.seed = seed;
  return r;
}

Persona synthesized_persona(const std::string& persona_id) {
  Persona p;
  p.id = persona_id.empty() ? "default" : persona_id;
  p.display_name = p.id;
  p.mbti_axis = "none";
  p.prompt_text =
      "You manage a home battery, buying and selling energy at the daily price.";
  return p;
}

// One repetition driven by a benchmark policy. Blackout days fall back to
// Hold: the benchmark rules are defined on the open market and Hold is the
// one action legal everywhere.
RepOutcome run_policy_repetition(const RunSpec& spec, const Policy& policy, int repetition,
                                 const PricePath& path) {
  const std::uint64_t seed = spec.base_seed + static_cast<std::uint64_t>(repetition);
  RepOutcome out;
  EnvState state = initial_state(spec.cfg, spec.intervention);
  for (int day = 1; day <= spec.cfg.horizon_days; ++day) {
    const Cents price = path[static_cast<std::size_t>(day - 1)];
    out.soc_by_day.push_back(state.soc_wh);
    Action action = policy.decide(day, state.soc_wh, price);
    if (!is_feasible(action, state, spec.cfg, spec.intervention)) action = Action::Hold;
    const StepOutcome step_out = step(state, action, price, spec.cfg, spec.intervention);

    DayRecord r = base_record(spec, repetition, seed);
    r.persona = policy.name();
    r.day = day;
    r.price_cents = price;
    r.soc_before_kwh = static_cast<double>(state.soc_wh) / 1000.0;
    r.soc_after_kwh = static_cast<double>(step_out.next_state.soc_wh) / 1000.0;
    r.action = step_out.applied_action;
    r.reward_cents = step_out.reward_cents;
    r.cum_reward_cents = step_out.next_state.cum_reward_cents;
    r.in_blackout = state.in_blackout;
    r.backend_model = "none";
    out.records.push_back(std::move(r));

    state = step_out.next_state;
  }
  out.soc_by_day.push_back(state.soc_wh);
  out.terminal_reward_cents = state.cum_reward_cents;
  out.terminal_soc_wh = state.soc_wh;
  out.ok = true;
  return out;
}

RepOutcome run_agent_repetition(const RunSpec& spec, const Persona& persona, int repetition,
                                const PricePath& path, const HarnessOptions& opts) {
  const std::uint64_t seed = spec.base_seed + static_cast<std::uint64_t>(repetition);
  RepOutcome out;
  try {
    auto backend = make_backend(spec.backend_spec, spec.cfg, spec.model, seed,
                                opts.http_base_url, opts.http_api_key, opts.http_model);
    backend->begin_episode();
    Agent agent(persona, backend, opts.chat_params, spec.cfg, spec.intervention);

    EnvState state = initial_state(spec.cfg, spec.intervention);
    for (int day = 1; day <= spec.cfg.horizon_days; ++day) {
      const Cents price = path[static_cast<std::size_t>(day - 1)];
      out.soc_by_day.push_back(state.soc_wh);
      const Agent::StepResult sr = agent.act(state, price);

      DayRecord r = base_record(spec, repetition, seed);
      r.persona = persona.id;
      r.day = day;
      r.price_cents = price;
      r.soc_before_kwh = static_cast<double>(state.soc_wh) / 1000.0;
      r.soc_after_kwh = static_cast<double>(sr.outcome.next_state.soc_wh) / 1000.0;
      r.action = sr.outcome.applied_action;
      r.reward_cents = sr.outcome.reward_cents;
      r.cum_reward_cents = sr.outcome.next_state.cum_reward_cents;
      r.in_blackout = state.in_blackout;
      r.thoughts = sr.response.thoughts;
      r.reflection = sr.response.reflection;
      r.journal = sr.response.journal;
      r.backend_model = backend->model_id();
      out.records.push_back(std::move(r));

      state = sr.outcome.next_state;
    }
    out.soc_by_day.push_back(state.soc_wh);
    out.terminal_reward_cents = state.cum_reward_cents;
    out.terminal_soc_wh = state.soc_wh;
    out.ok = true;
  } catch (const Error& e) {
    out.ok = false;
    out.error = e.what();
    out.records.clear();
  }
  return out;
}

SummaryStats reduce_stats(const std::vector<RepOutcome>& outcomes, const BatteryConfig& cfg) {
  SummaryStats stats;
  stats.mean_soc_kwh_by_day.assign(static_cast<std::size_t>(cfg.horizon_days) + 1, 0.0);
  stats.terminal_soc_histogram.assign(static_cast<std::size_t>(cfg.levels()), 0);

  double sum = 0.0;
  for (const RepOutcome& o : outcomes) {
    if (!o.ok) {
      ++stats.failure_count;
      continue;
    }
    ++stats.success_count;
    sum += static_cast<double>(o.terminal_reward_cents);
    for (std::size_t d = 0; d < o.soc_by_day.size(); ++d)
      stats.mean_soc_kwh_by_day[d] += static_cast<double>(o.soc_by_day[d]) / 1000.0;
    stats.terminal_soc_histogram[static_cast<std::size_t>(
        cfg.level_of(o.terminal_soc_wh))]++;
  }
  if (stats.success_count > 0) {
    stats.mean_terminal_reward_cents = sum / stats.success_count;
    for (double& v : stats.mean_soc_kwh_by_day) v /= stats.success_count;
  }
  if (stats.success_count > 1) {
    double ss = 0.0;
    for (const RepOutcome& o : outcomes) {
      if (!o.ok) continue;
      const double d =
          static_cast<double>(o.terminal_reward_cents) - stats.mean_terminal_reward_cents;
      ss += d * d;
    }
    stats.sd_terminal_reward_cents = std::sqrt(ss / (stats.success_count - 1));
  }
  return stats;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw IoError("short write: " + path.string());
}

}  // namespace

RunResult run_monte_carlo(const RunSpec& spec, const HarnessOptions& opts) {
  spec.validate();

  // Benchmark policies are shared across repetitions; agents are rebuilt
  // per repetition with that repetition's seed.
  std::shared_ptr<const Policy> policy;
  if (spec.policy_kind == PolicyKind::Dp) {
    policy = std::make_shared<DpTablePolicy>(solve_dp(spec.cfg, spec.model));
  } else if (spec.policy_kind == PolicyKind::Greedy) {
    policy = std::make_shared<GreedyPolicy>(spec.cfg, spec.model);
  }
  const Persona persona =
      opts.persona.has_value() ? *opts.persona : synthesized_persona(spec.persona_id);
  if (spec.policy_kind == PolicyKind::Agent) persona.validate();

  std::vector<RepOutcome> outcomes(static_cast<std::size_t>(spec.repetitions));
  std::atomic<int> next_rep{0};
  auto worker = [&] {
    while (true) {
      const int rep = next_rep.fetch_add(1);
      if (rep >= spec.repetitions) return;
      const PricePath path = path_for_repetition(spec, rep);
      outcomes[static_cast<std::size_t>(rep)] =
          (spec.policy_kind == PolicyKind::Agent)
              ? run_agent_repetition(spec, persona, rep, path, opts)
              : run_policy_repetition(spec, *policy, rep, path);
    }
  };
  const int n_workers = std::max(1, std::min(spec.workers, spec.repetitions));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  RunResult result;
  result.stats = reduce_stats(outcomes, spec.cfg);

  if (!opts.out_root.empty()) {
    const std::filesystem::path run_dir = opts.out_root / spec.run_id;
    RecordSink sink(run_dir, spec);
    for (const RepOutcome& o : outcomes) {
      if (!o.ok) {
        sink.note_failure();
        continue;
      }
      for (const DayRecord& r : o.records) sink.append(r);
    }
    sink.finalize();
    result.run_dir = run_dir;
  }
  for (const RepOutcome& o : outcomes)
    if (o.ok) result.records.insert(result.records.end(), o.records.begin(), o.records.end());

  result.manifest.run_id = spec.run_id;
  result.manifest.spec = spec;
  result.manifest.code_version = kCodeVersion;
  result.manifest.record_count = result.records.size();
  result.manifest.failure_count = static_cast<std::size_t>(result.stats.failure_count);
  if (!result.run_dir.empty()) {
    write_text_file(result.run_dir / "summary.csv", summary_csv(result, spec));
    // Reload so callers see the persisted manifest verbatim (timestamp included).
    result.manifest = load_run(result.run_dir).manifest;
  }
  return result;
}

std::pair<RunResult, RunResult> run_intervention_pair(const RunSpec& spec,
                                                      const HarnessOptions& opts) {
  RunSpec treatment = spec;
  treatment.run_id = spec.run_id + "_treatment";
  if (treatment.intervention.blackout_days.empty())
    treatment.intervention = InterventionSchedule::treatment_default();

  RunSpec control = spec;
  control.run_id = spec.run_id + "_control";
  control.intervention = InterventionSchedule{};

  // Same scenario and base_seed in both specs: repetition i faces the same
  // price path and mock seed in each arm.
  RunResult t = run_monte_carlo(treatment, opts);
  RunResult c = run_monte_carlo(control, opts);
  return {std::move(t), std::move(c)};
}

ScanResult scan_scenarios(const PriceModel& model, const BatteryConfig& cfg, int n_paths,
                          std::uint64_t seed) {
  if (n_paths < 1) throw ConfigError("scan needs at least one path");
  const auto dp = solve_dp(cfg, model);

  ScanResult out;
  out.entries.reserve(static_cast<std::size_t>(n_paths));
  for (int j = 0; j < n_paths; ++j) {
    const std::uint64_t path_seed = seed + static_cast<std::uint64_t>(j);
    const PricePath path = sample_price_path(model, cfg.horizon_days, path_seed);
    ScanEntry entry;
    entry.path_seed = path_seed;
    try {
      entry.report = complexity_rho(path, *dp);
    } catch (const DegenerateScenario&) {
      entry.degenerate = true;
      entry.report.path = path;
      ++out.degenerate_count;
    }
    out.entries.push_back(std::move(entry));
  }
  std::stable_sort(out.entries.begin(), out.entries.end(),
                   [](const ScanEntry& a, const ScanEntry& b) {
                     if (a.degenerate != b.degenerate) return !a.degenerate;
                     return a.report.rho < b.report.rho;
                   });
  return out;
}

std::array<std::size_t, 3> nearest_exemplar_indices(const ScanResult& scan) {
  std::array<std::size_t, 3> best{};
  bool any = false;
  for (std::size_t e = 0; e < kRhoExemplars.size(); ++e) {
    bool found = false;
    double best_gap = 0.0;
    for (std::size_t i = 0; i < scan.entries.size(); ++i) {
      if (scan.entries[i].degenerate) continue;
      const double gap = std::abs(scan.entries[i].report.rho - kRhoExemplars[e]);
      if (!found || gap < best_gap) {
        best[e] = i;
        best_gap = gap;
        found = true;
      }
    }
    any = any || found;
  }
  if (!any) throw DegenerateScenario("scan produced no gradable paths");
  return best;
}

double high_price_share(const PricePath& path, const PriceModel& model) {
  if (path.empty()) return 0.0;
  int high = 0;
  for (Cents p : path)
    if (p == model.high_cents) ++high;
  return static_cast<double>(high) / static_cast<double>(path.size());
}

std::string summary_csv(const RunResult& result, const RunSpec& spec) {
  std::ostringstream csv;
  csv << "run_id,persona,successes,failures,mean_terminal_reward_cents,"
         "sd_terminal_reward_cents";
  for (int d = 1; d <= spec.cfg.horizon_days + 1; ++d) csv << ",mean_soc_kwh_day_" << d;
  csv << "\n";
  const std::string who =
      spec.policy_kind == PolicyKind::Agent ? spec.persona_id : to_string(spec.policy_kind);
  csv << spec.run_id << ',' << who << ',' << result.stats.success_count << ','
      << result.stats.failure_count << ',';
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", result.stats.mean_terminal_reward_cents);
  csv << buf << ',';
  std::snprintf(buf, sizeof(buf), "%.6f", result.stats.sd_terminal_reward_cents);
  csv << buf;
  for (const double soc : result.stats.mean_soc_kwh_by_day) {
    std::snprintf(buf, sizeof(buf), "%.6f", soc);
    csv << ',' << buf;
  }
  csv << "\n";
  return csv.str();
}

}  // namespace agentlab
