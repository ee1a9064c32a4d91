#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "agentlab/env.hpp"
#include "agentlab/policy.hpp"
#include "agentlab/storage.hpp"
#include "json.hpp"
#include "util.hpp"

using namespace agentlab;

namespace {

struct CliOut {
  int code = -1;
  std::string out;
  std::string err;
};

// Runs the installed binary from the repo root (so default data paths
// resolve) with the backend env vars scrubbed unless a test injects them.
CliOut run_cli(const std::string& args, const std::filesystem::path& io_dir,
               const std::string& env = "") {
  static int counter = 0;
  const auto out_file = io_dir / ("out_" + std::to_string(counter) + ".txt");
  const auto err_file = io_dir / ("err_" + std::to_string(counter) + ".txt");
  ++counter;

  std::string cmd = "cd " AGENTLAB_REPO_ROOT " && env -u AGENTLAB_BASE_URL -u AGENTLAB_API_KEY ";
  if (!env.empty()) cmd += env + " ";
  cmd += AGENTLAB_CLI_PATH " " + args + " > " + out_file.string() + " 2> " + err_file.string();

  const int raw = std::system(cmd.c_str());
  CliOut result;
  result.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  result.out = testutil::read_file(out_file);
  result.err = testutil::read_file(err_file);
  return result;
}

bool has(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

std::string loc(const testutil::TempDir& tmp, const std::string& name) {
  return (tmp / name).string();
}

std::string twenty_day_path_file(const testutil::TempDir& tmp) {
  std::string prices;
  for (int d = 0; d < 20; ++d) prices += (d % 3 == 2 ? "1000 " : "500 ");
  testutil::write_file(tmp / "path.txt", prices);
  return loc(tmp, "path.txt");
}

}  // namespace

TEST_CASE("version and help are zero-cost exits") {
  testutil::TempDir tmp("cli_version");
  CHECK_EQ(run_cli("--version", tmp.path()).code, 0);
  const CliOut help = run_cli("--help", tmp.path());
  CHECK_EQ(help.code, 0);
  CHECK(has(help.out, "solve-dp"));
  CHECK(has(help.out, "simulate"));
}

TEST_CASE("bad invocations exit with the configuration code") {
  testutil::TempDir tmp("cli_bad");
  CHECK_EQ(run_cli("", tmp.path()).code, 2);                        // subcommand required
  CHECK_EQ(run_cli("solve-dp --no-such-flag", tmp.path()).code, 2);
  CHECK_EQ(run_cli("simulate --policy quantum", tmp.path()).code, 2);
  CHECK_EQ(run_cli("analyze", tmp.path()).code, 2);                 // --runs required

  testutil::write_file(tmp / "bad.json", R"({"nope": 1})");
  const CliOut unknown = run_cli("show-config --config " + loc(tmp, "bad.json"), tmp.path());
  CHECK_EQ(unknown.code, 2);
  CHECK(has(unknown.err, "unknown config key"));

  CHECK_EQ(run_cli("show-config --config " + loc(tmp, "missing.json"), tmp.path()).code, 2);

  testutil::write_file(tmp / "invalid.json", R"({"battery": {"horizon_days": 0}})");
  CHECK_EQ(run_cli("show-config --config " + loc(tmp, "invalid.json"), tmp.path()).code, 2);
}

TEST_CASE("the solver prints both expectations and writes a loadable table") {
  testutil::TempDir tmp("cli_solve");
  const std::string dp_file = loc(tmp, "dp.json");
  const CliOut r = run_cli("solve-dp -T 3 --s0 5 --out " + dp_file, tmp.path());
  CHECK_EQ(r.code, 0);
  CHECK(has(r.out, "E[reward | dp]"));
  CHECK(has(r.out, "E[reward | greedy]"));
  CHECK(has(r.out, "rho"));
  CHECK(has(r.out, "wrote " + dp_file));

  // byte-identical to solving the same instance in-process
  BatteryConfig cfg;
  cfg.horizon_days = 3;
  const auto dp = solve_dp(cfg, PriceModel{});
  CHECK_EQ(testutil::read_file(dp_file), dp->to_json_string());
  const auto reloaded = DpSolution::from_json_string(testutil::read_file(dp_file));
  CHECK_EQ(reloaded.expected_start_value_cents(), dp->expected_start_value_cents());
}

TEST_CASE("the effective configuration echoes as JSON with overrides applied") {
  testutil::TempDir tmp("cli_show");
  const CliOut r = run_cli("show-config", tmp.path());
  REQUIRE_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK_EQ(j["battery"]["horizon_days"].get<int>(), 20);
  CHECK_EQ(j["battery"]["capacity_kwh"].get<double>(), 10.0);
  CHECK_EQ(j["prices"]["low_cents"].get<long long>(), 500);
  CHECK_EQ(j["run"]["output_dir"].get<std::string>(), "runs");
  CHECK_EQ(j["run"]["blackout_days"].get<std::vector<int>>(), (std::vector<int>{8, 9}));
  CHECK_EQ(j["analysis"]["k"].get<int>(), 5);
  CHECK_EQ(j["backend"]["chat_model"].get<std::string>(), "gpt-4o-mini");

  testutil::write_file(tmp / "cfg.json", R"({"battery": {"horizon_days": 6}})");
  const CliOut o = run_cli("show-config --config " + loc(tmp, "cfg.json"), tmp.path());
  REQUIRE_EQ(o.code, 0);
  CHECK_EQ(nlohmann::json::parse(o.out)["battery"]["horizon_days"].get<int>(), 6);
}

TEST_CASE("scans grade paths into a CSV plus difficulty summary") {
  testutil::TempDir tmp("cli_scan");
  const std::string csv_file = loc(tmp, "scan.csv");
  const CliOut r = run_cli("scan --n-paths 30 --seed 7 --out " + csv_file, tmp.path());
  REQUIRE_EQ(r.code, 0);
  CHECK(has(r.out, "scanned 30 paths:"));
  CHECK(has(r.out, "nearest rho to 0.067"));
  CHECK(has(r.out, "nearest rho to 0.909"));

  const std::string csv = testutil::read_file(csv_file);
  CHECK(csv.rfind("path_seed,rho,r_dp_cents,r_greedy_cents,label,degenerate,high_price_share,path\n",
                  0) == 0);
  CHECK_EQ(std::count(csv.begin(), csv.end(), '\n'), 31);
  const auto first_nl = csv.find('\n');
  const auto second_nl = csv.find('\n', first_nl + 1);
  const std::string first_row = csv.substr(first_nl + 1, second_nl - first_nl - 1);
  CHECK_EQ(std::count(first_row.begin(), first_row.end(), ','), 7);
  const std::string path_field = first_row.substr(first_row.rfind(',') + 1);
  CHECK_EQ(path_field.size(), 20);
  for (const char c : path_field) CHECK((c == 'H' || c == 'L'));
}

TEST_CASE("a benchmark simulation persists a replayable run") {
  testutil::TempDir tmp("cli_sim");
  testutil::write_file(tmp / "cfg.json",
                       std::string(R"({"run": {"output_dir": ")") + loc(tmp, "runs") + R"("}})");
  const CliOut r = run_cli("simulate --policy dp --reps 4 --path-file " +
                               twenty_day_path_file(tmp) + " --config " + loc(tmp, "cfg.json") +
                               " --run-id dpdemo",
                           tmp.path());
  REQUIRE_EQ(r.code, 0);
  CHECK(has(r.out, "dpdemo: reps=4 failures=0"));
  CHECK(has(r.out, "sd=$0.00"));  // fixed path, deterministic policy

  const std::filesystem::path run_dir = (tmp / "runs") / "dpdemo";
  CHECK(std::filesystem::exists(run_dir / "records.jsonl"));
  CHECK(std::filesystem::exists(run_dir / "manifest.json"));
  CHECK(std::filesystem::exists(run_dir / "summary.csv"));
  const LoadedRun loaded = load_run(run_dir);
  CHECK_EQ(loaded.records.size(), 80);
  CHECK_EQ(replay_run(loaded), 80);
  CHECK(testutil::read_file(run_dir / "summary.csv")
            .rfind("run_id,persona,successes,failures,mean_terminal_reward_cents", 0) == 0);

  // a benchmark run has no prose, so the analyzer refuses it as a data error
  const CliOut no_text = run_cli(
      "analyze --runs " + run_dir.string() + " --out-dir " + loc(tmp, "an"), tmp.path());
  CHECK_EQ(no_text.code, 4);
  CHECK(has(no_text.err, "data error"));
}

TEST_CASE("paired agent runs feed the analyzer and the figure renderer") {
  testutil::TempDir tmp("cli_pair");
  const std::string cfg_file = loc(tmp, "cfg.json");
  testutil::write_file(
      tmp / "cfg.json",
      std::string(R"({"run": {"output_dir": ")") + loc(tmp, "runs") +
          R"(", "blackout_days": [4, 5]},
           "analysis": {"k": 2, "perplexity": 8, "tsne_iterations": 250, "pca_dims": 12}})");

  const CliOut sim = run_cli(
      "simulate --policy agent --backend mock:shift --persona feeler --reps 2 --paired "
      "--path-seed 99 --config " + cfg_file + " --run-id pairdemo",
      tmp.path());
  REQUIRE_EQ(sim.code, 0);
  CHECK(has(sim.out, "pairdemo_treatment: reps=2 failures=0"));
  CHECK(has(sim.out, "pairdemo_control: reps=2 failures=0"));

  const std::string treatment = ((tmp / "runs") / "pairdemo_treatment").string();
  const std::string control = ((tmp / "runs") / "pairdemo_control").string();

  const CliOut an = run_cli("analyze --runs " + treatment + " " + control + " --config " +
                                cfg_file + " --out-dir " + loc(tmp, "analysis"),
                            tmp.path());
  REQUIRE_EQ(an.code, 0);
  CHECK(has(an.out, "condition shift written"));
  const std::filesystem::path adir = tmp / "analysis";
  const auto cluster_json = nlohmann::json::parse(testutil::read_file(adir / "cluster_report.json"));
  CHECK_EQ(cluster_json["k"].get<int>(), 2);
  CHECK_EQ(cluster_json["labels"].size(), 80);
  CHECK(testutil::read_file(adir / "scatter.csv")
            .rfind("doc_id,persona,condition,x,y,label\n", 0) == 0);
  CHECK(testutil::read_file(adir / "scatter.svg").rfind("<svg", 0) == 0);
  const auto shift_json = nlohmann::json::parse(testutil::read_file(adir / "shift_report.json"));
  CHECK(shift_json["personas"].contains("feeler"));

  const CliOut rep = run_cli(
      "report --runs " + treatment + " " + control + " --out-dir " + loc(tmp, "figs"),
      tmp.path());
  REQUIRE_EQ(rep.code, 0);
  const std::filesystem::path figs = tmp / "figs";
  for (const char* name :
       {"timeseries_pairdemo_treatment.csv", "timeseries_pairdemo_control.csv",
        "terminal_histogram_pairdemo_treatment.csv", "terminal_histogram_pairdemo_control.csv",
        "comparison.svg", "overlay.svg", "intervention.svg"}) {
    CHECK_MESSAGE(std::filesystem::exists(figs / name), name);
    CHECK(has(rep.out, name));
  }
  const std::string svg = testutil::read_file(figs / "intervention.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(has(svg, "</svg>"));

  // an unreachable embeddings endpoint is a backend failure, not a config one
  const CliOut embed = run_cli("analyze --runs " + treatment + " --mode embed --out-dir " +
                                   loc(tmp, "embed"),
                               tmp.path(),
                               "AGENTLAB_BASE_URL=http://127.0.0.1:1 AGENTLAB_API_KEY=x");
  CHECK_EQ(embed.code, 3);
  CHECK(has(embed.err, "backend error"));

  // embed mode without a key is caught before any request is attempted
  const CliOut nokey = run_cli("analyze --runs " + treatment + " --mode embed --out-dir " +
                                   loc(tmp, "embed2"),
                               tmp.path(), "AGENTLAB_BASE_URL=http://127.0.0.1:1");
  CHECK_EQ(nokey.code, 2);
  CHECK(has(nokey.err, "AGENTLAB_API_KEY"));
}

TEST_CASE("reporting a missing run directory is a data error") {
  testutil::TempDir tmp("cli_data");
  const CliOut r = run_cli("report --runs " + loc(tmp, "does_not_exist"), tmp.path());
  CHECK_EQ(r.code, 4);
  CHECK(has(r.err, "data error"));
}
