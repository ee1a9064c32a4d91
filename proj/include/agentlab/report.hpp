#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "agentlab/analytics.hpp"
#include "agentlab/storage.hpp"

namespace agentlab {

// Per-run plotting series derived purely from persisted records. Index x in
// 0..T means "after x days": soc[0] is the initial charge, cum[0] is 0.
struct RunSeries {
  std::string run_id;
  std::string who;  // persona id or policy name
  int horizon_days = 0;
  int reps = 0;
  bool blackout_arm = false;
  std::vector<double> mean_soc_kwh;
  std::vector<double> sd_soc_kwh;
  std::vector<double> mean_cum_reward_cents;
  std::vector<double> sd_cum_reward_cents;
  std::vector<int> terminal_soc_histogram;  // counts per soc level
  double level_kwh = 1.0;                   // histogram bin width
};

RunSeries series_from_run(const LoadedRun& run);

std::string series_csv(const RunSeries& s);
std::string histogram_csv(const RunSeries& s);

// One panel per run (soc and cumulative reward stacked), runs side by side.
std::string render_comparison_svg(const std::vector<RunSeries>& runs);

// All runs overlaid on shared soc/reward axes with +-1 sd bands.
std::string render_overlay_svg(const std::vector<RunSeries>& runs);

// Treatment vs control soc curves plus terminal-soc histograms.
std::string render_intervention_svg(const RunSeries& treatment, const RunSeries& control);

// 2-D layout colored by cluster label, point shape ignored; persona in tooltip.
std::string render_scatter_svg(const std::vector<Document>& corpus,
                               const std::vector<std::array<double, 2>>& coords,
                               const std::vector<int>& labels);

// Loads each run dir, writes every applicable figure and CSV into out_dir,
// and returns the written paths. Throws on unloadable/empty runs.
std::vector<std::filesystem::path> write_report(
    const std::vector<std::filesystem::path>& run_dirs,
    const std::filesystem::path& out_dir);

}  // namespace agentlab
