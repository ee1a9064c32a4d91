#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "agentlab/agent.hpp"
#include "agentlab/env.hpp"

namespace agentlab {

// Everything the command-line surface can tune, with defaults matching the
// standard experiment: 20-day horizon, 10 kWh battery starting at 5 kWh,
// 5/10 dollar prices at p=0.5, 40 agent repetitions, 2000 benchmark
// repetitions, 5 clusters, blackouts on days 8-9.
struct CliConfig {
  BatteryConfig cfg;
  PriceModel model;

  int repetitions = 40;             // agent runs
  int benchmark_repetitions = 2000; // dp/greedy sweeps
  std::uint64_t base_seed = 1;
  int workers = 4;
  std::vector<int> blackout_days = {8, 9};
  std::string output_dir = "runs";

  int k = 5;
  int top_m = 9;
  double perplexity = 30.0;
  int tsne_iterations = 1000;
  int pca_dims = 50;
  bool cluster_in_tsne_space = false;
  std::string stopwords_file = "data/stopwords.txt";

  std::string personas_dir = "data/personas";

  std::string http_base_url;  // AGENTLAB_BASE_URL overrides when set
  std::string chat_model = "gpt-4o-mini";
  std::string embed_model = "text-embedding-3-small";
  ChatBackendParams chat;

  void validate() const;
};

// Parses a JSON config file; keys omitted keep their defaults, unknown keys
// are rejected so typos surface immediately.
CliConfig load_cli_config(const std::filesystem::path& file);

// The full config as JSON with every default filled in.
std::string cli_config_to_json_string(const CliConfig& config);

}  // namespace agentlab
