#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "agentlab/agent.hpp"
#include "agentlab/backend.hpp"
#include "agentlab/policy.hpp"
#include "agentlab/runspec.hpp"
#include "agentlab/storage.hpp"

namespace agentlab {

struct SummaryStats {
  double mean_terminal_reward_cents = 0.0;
  double sd_terminal_reward_cents = 0.0;      // sample sd (n-1); 0 when n < 2
  std::vector<double> mean_soc_kwh_by_day;    // entering day 1..T, then terminal
  std::vector<int> terminal_soc_histogram;    // counts per soc level 0..capacity/unit
  int success_count = 0;
  int failure_count = 0;
};

struct RunResult {
  SummaryStats stats;
  RunManifest manifest;
  std::filesystem::path run_dir;    // empty when persistence was disabled
  std::vector<DayRecord> records;   // successful repetitions, repetition order
};

// Builds the chat backend named by a spec string:
//   mock:greedy | mock:hold | mock:dp | mock:reserve | mock:shift |
//   mock:greedy+dischargeall | http
// "http" reads AGENTLAB_BASE_URL / AGENTLAB_API_KEY unless explicit values
// are passed. Mock variants are offline and seeded.
std::shared_ptr<ChatBackend> make_backend(const std::string& backend_spec,
                                          const BatteryConfig& cfg, const PriceModel& model,
                                          std::uint64_t seed,
                                          const std::string& http_base_url = "",
                                          const std::string& http_api_key = "",
                                          const std::string& http_model = "");

// The price path seen by repetition i: the fixed path, or a fresh sample
// seeded with scenario.path_seed + i.
PricePath path_for_repetition(const RunSpec& spec, int repetition);

struct HarnessOptions {
  std::filesystem::path out_root;   // runs/ parent; empty disables persistence
  std::optional<Persona> persona;   // Agent runs; synthesized from persona_id if absent
  std::string http_base_url;
  std::string http_api_key;
  std::string http_model;
  ChatBackendParams chat_params;
};

// Runs spec.repetitions rollouts (repetition i seeded base_seed + i), writes
// records/manifest/summary under out_root/<run_id> when persistence is on,
// and reduces to summary statistics. Failed repetitions are excluded from
// the stats and counted.
RunResult run_monte_carlo(const RunSpec& spec, const HarnessOptions& opts = {});

// Treatment (spec.intervention, or days {8,9} if the spec's schedule is
// empty) versus control (no blackouts). Both arms share per-repetition
// price paths and seeds; run ids get _treatment/_control suffixes.
std::pair<RunResult, RunResult> run_intervention_pair(const RunSpec& spec,
                                                      const HarnessOptions& opts = {});

struct ScanEntry {
  ComplexityReport report;
  std::uint64_t path_seed = 0;  // sample_price_path seed that regenerates the path
  bool degenerate = false;      // DP rollout earned nothing; rho undefined
};

struct ScanResult {
  std::vector<ScanEntry> entries;  // valid entries sorted by rho, degenerate ones last
  int degenerate_count = 0;
};

// Samples n_paths price paths (path j seeded seed + j) and grades each one.
ScanResult scan_scenarios(const PriceModel& model, const BatteryConfig& cfg, int n_paths,
                          std::uint64_t seed);

// Reference difficulty levels the scan is matched against.
inline constexpr std::array<double, 3> kRhoExemplars = {0.067, 0.692, 0.909};

// Index into scan.entries of the achieved rho nearest each exemplar.
// Throws DegenerateScenario when the scan has no valid entries.
std::array<std::size_t, 3> nearest_exemplar_indices(const ScanResult& scan);

// Fraction of high-price days in a path.
double high_price_share(const PricePath& path, const PriceModel& model);

// One-row CSV (run_id, persona, reward stats, mean soc per day) plus header.
std::string summary_csv(const RunResult& result, const RunSpec& spec);

}  // namespace agentlab
