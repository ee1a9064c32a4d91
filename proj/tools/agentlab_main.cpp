#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "agentlab/analytics.hpp"
#include "agentlab/config.hpp"
#include "agentlab/errors.hpp"
#include "agentlab/harness.hpp"
#include "agentlab/policy.hpp"
#include "agentlab/report.hpp"
#include "agentlab/version.hpp"

namespace {

using namespace agentlab;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitBackend = 3;
constexpr int kExitData = 4;

std::string money(double cents) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "$%.2f", cents / 100.0);
  return buf;
}

void write_file_or_die(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw IoError("short write: " + path.string());
}

InterventionSchedule schedule_from(const CliConfig& config) {
  InterventionSchedule schedule;
  schedule.blackout_days.insert(config.blackout_days.begin(), config.blackout_days.end());
  return schedule;
}

// Shared flags: every subcommand accepts --config.
struct CommonOpts {
  std::string config_file;

  CliConfig load() const {
    if (config_file.empty()) return CliConfig{};
    return load_cli_config(config_file);
  }
};

int cmd_solve_dp(const CommonOpts& common, int horizon_override, double s0_override_kwh,
                 const std::string& out_file) {
  CliConfig config = common.load();
  if (horizon_override > 0) config.cfg.horizon_days = horizon_override;
  if (s0_override_kwh >= 0.0)
    config.cfg.initial_soc_wh = static_cast<WattHours>(s0_override_kwh * 1000.0 + 0.5);
  config.validate();

  const auto dp = solve_dp(config.cfg, config.model);
  const double r_dp = dp->expected_start_value_cents();
  const double r_greedy =
      exact_expected_reward(GreedyPolicy(config.cfg, config.model), config.cfg, config.model);
  std::cout << "E[reward | dp]     = " << money(r_dp) << " (" << r_dp << " cents)\n";
  std::cout << "E[reward | greedy] = " << money(r_greedy) << " (" << r_greedy << " cents)\n";
  if (r_dp > 0.0) {
    std::cout << "rho                = " << (r_dp - r_greedy) / r_dp << "\n";
  } else {
    std::cout << "rho                = undefined (dp expectation is not positive)\n";
  }
  if (!out_file.empty()) {
    write_file_or_die(out_file, dp->to_json_string());
    std::cout << "wrote " << out_file << "\n";
  }
  return kExitOk;
}

PricePath path_from_file(const std::string& file, const PriceModel& model) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open path file: " + file);
  PricePath path;
  std::string token;
  while (in >> token) {
    while (!token.empty() && token.back() == ',') token.pop_back();
    if (token.empty()) continue;
    try {
      path.push_back(std::stoll(token));
    } catch (const std::exception&) {
      throw ConfigError("path file entry is not an integer cent price: " + token);
    }
  }
  if (path.empty()) throw ConfigError("path file has no prices: " + file);
  for (const Cents p : path)
    if (p != model.low_cents && p != model.high_cents)
      throw ConfigError("path price " + std::to_string(p) +
                        " is neither the low nor the high level");
  return path;
}

int cmd_simulate(const CommonOpts& common, const std::string& policy_name,
                 const std::string& persona_id, const std::string& backend_spec,
                 std::uint64_t path_seed, const std::string& path_file, bool blackout,
                 bool paired, int reps_override, std::uint64_t seed_override,
                 const std::string& run_id_override) {
  CliConfig config = common.load();
  config.validate();

  RunSpec spec;
  spec.policy_kind = policy_kind_from_string(policy_name);
  spec.cfg = config.cfg;
  spec.model = config.model;
  spec.workers = config.workers;
  spec.base_seed = seed_override != 0 ? seed_override : config.base_seed;
  spec.repetitions = reps_override > 0
                         ? reps_override
                         : (spec.policy_kind == PolicyKind::Agent
                                ? config.repetitions
                                : config.benchmark_repetitions);
  if (!path_file.empty()) {
    PricePath path = path_from_file(path_file, config.model);
    if (static_cast<int>(path.size()) != config.cfg.horizon_days)
      throw ConfigError("path file has " + std::to_string(path.size()) +
                        " prices but the horizon is " +
                        std::to_string(config.cfg.horizon_days));
    spec.scenario = Scenario::fixed(std::move(path));
  } else {
    spec.scenario = Scenario::sampled(path_seed);
  }
  if (blackout || paired) spec.intervention = schedule_from(config);

  HarnessOptions opts;
  opts.out_root = config.output_dir;
  opts.chat_params = config.chat;
  opts.http_base_url = config.http_base_url;
  opts.http_model = config.chat_model;
  if (spec.policy_kind == PolicyKind::Agent) {
    spec.persona_id = persona_id.empty() ? "thinker" : persona_id;
    spec.backend_spec = backend_spec.empty() ? "mock:greedy" : backend_spec;
    // Resolve the persona from disk when a persona directory is present;
    // otherwise the harness synthesizes a minimal one.
    const std::filesystem::path pfile =
        std::filesystem::path(config.personas_dir) / (spec.persona_id + ".txt");
    if (std::filesystem::exists(pfile)) opts.persona = load_persona_file(pfile);
    // A bad spec or missing credential fails every repetition the same way,
    // so reject it with the config exit code before any repetitions start.
    make_backend(spec.backend_spec, spec.cfg, spec.model, 0, config.http_base_url, "",
                 config.chat_model);
  }

  std::string run_id = run_id_override;
  if (run_id.empty()) {
    std::ostringstream name;
    name << to_string(spec.policy_kind);
    if (spec.policy_kind == PolicyKind::Agent) name << "_" << spec.persona_id;
    name << "_s" << spec.base_seed;
    run_id = name.str();
  }
  spec.run_id = run_id;

  const auto print_summary = [](const RunResult& r) {
    std::cout << r.manifest.run_id << ": reps=" << r.stats.success_count
              << " failures=" << r.stats.failure_count
              << " mean_terminal_reward=" << money(r.stats.mean_terminal_reward_cents)
              << " sd=" << money(r.stats.sd_terminal_reward_cents) << "\n"
              << "  records: " << (r.run_dir / "records.jsonl").string() << "\n";
  };

  // Partial failures are tolerated (the summary reports them), but a run
  // where nothing succeeded produced no usable records.
  const auto ensure_usable = [](const RunResult& r) {
    if (r.stats.success_count == 0 && r.stats.failure_count > 0)
      throw BackendError(BackendError::Category::Transport, 0,
                         "all " + std::to_string(r.stats.failure_count) +
                             " repetitions of " + r.manifest.run_id + " failed");
  };

  if (paired) {
    const auto [treatment, control] = run_intervention_pair(spec, opts);
    print_summary(treatment);
    print_summary(control);
    ensure_usable(treatment);
    ensure_usable(control);
  } else {
    const RunResult result = run_monte_carlo(spec, opts);
    print_summary(result);
    ensure_usable(result);
  }
  return kExitOk;
}

int cmd_scan(const CommonOpts& common, int n_paths, std::uint64_t seed,
             const std::string& out_file) {
  CliConfig config = common.load();
  config.validate();

  const ScanResult scan = scan_scenarios(config.model, config.cfg, n_paths, seed);
  std::ostringstream csv;
  csv << "path_seed,rho,r_dp_cents,r_greedy_cents,label,degenerate,high_price_share,path\n";
  int easy = 0, medium = 0, hard = 0;
  for (const ScanEntry& e : scan.entries) {
    char rho_buf[64];
    std::snprintf(rho_buf, sizeof(rho_buf), "%.6f", e.report.rho);
    csv << e.path_seed << ',' << (e.degenerate ? "" : rho_buf) << ',' << e.report.r_dp_cents
        << ',' << e.report.r_greedy_cents << ','
        << (e.degenerate ? "degenerate" : to_string(e.report.label)) << ','
        << (e.degenerate ? 1 : 0) << ',';
    char share_buf[64];
    std::snprintf(share_buf, sizeof(share_buf), "%.4f",
                  high_price_share(e.report.path, config.model));
    csv << share_buf << ',';
    for (const Cents p : e.report.path) csv << (p == config.model.high_cents ? 'H' : 'L');
    csv << "\n";
    if (!e.degenerate) {
      switch (e.report.label) {
        case ComplexityLabel::Easy: ++easy; break;
        case ComplexityLabel::Medium: ++medium; break;
        case ComplexityLabel::Hard: ++hard; break;
      }
    }
  }
  const std::string out = out_file.empty()
                              ? (std::filesystem::path(config.output_dir) / "scan.csv").string()
                              : out_file;
  write_file_or_die(out, csv.str());
  std::cout << "scanned " << scan.entries.size() << " paths: easy=" << easy
            << " medium=" << medium << " hard=" << hard
            << " degenerate=" << scan.degenerate_count << "\n";
  const auto nearest = nearest_exemplar_indices(scan);
  for (std::size_t i = 0; i < nearest.size(); ++i) {
    const ScanEntry& e = scan.entries[nearest[i]];
    std::cout << "nearest rho to " << kRhoExemplars[i] << ": rho=" << e.report.rho
              << " (path seed " << e.path_seed << ")\n";
  }
  std::cout << "wrote " << out << "\n";
  return kExitOk;
}

int cmd_analyze(const CommonOpts& common, const std::vector<std::string>& run_dirs, int k,
                const std::string& mode, const std::string& out_dir_flag) {
  CliConfig config = common.load();
  if (k > 0) config.k = k;
  config.validate();

  std::vector<std::filesystem::path> dirs(run_dirs.begin(), run_dirs.end());
  const std::vector<Document> corpus = load_documents(dirs);
  if (corpus.empty())
    throw IoError("the given runs contain no textual records to analyze");

  AnalysisOptions opts;
  opts.k = config.k;
  opts.top_m = config.top_m;
  opts.perplexity = config.perplexity;
  opts.tsne_iterations = config.tsne_iterations;
  opts.pca_dims = config.pca_dims;
  opts.seed = config.base_seed;
  opts.cluster_in_tsne_space = config.cluster_in_tsne_space;
  if (!std::filesystem::exists(config.stopwords_file))
    throw ConfigError("stopword list not found: " + config.stopwords_file +
                      " (run from the repository root or set analysis.stopwords_file)");
  opts.stopwords = load_stopwords(config.stopwords_file);

  std::unique_ptr<HttpEmbeddingBackend> embedder;
  if (mode == "embed") {
    const char* key = std::getenv("AGENTLAB_API_KEY");
    const char* url = std::getenv("AGENTLAB_BASE_URL");
    const std::string base_url =
        (url != nullptr && *url) ? url : config.http_base_url;
    if (base_url.empty())
      throw ConfigError("embed mode requires a base URL (AGENTLAB_BASE_URL or config)");
    if (key == nullptr || !*key) throw ConfigError("missing AGENTLAB_API_KEY");
    embedder = std::make_unique<HttpEmbeddingBackend>(base_url, key, config.embed_model);
    opts.embedder = embedder.get();
    opts.embedding_model = config.embed_model;
  } else if (mode != "tfidf") {
    throw ConfigError("--mode must be tfidf or embed, got: " + mode);
  }

  const AnalysisResult result = analyze_documents(corpus, opts);

  const std::filesystem::path out_dir =
      out_dir_flag.empty() ? (std::filesystem::path(config.output_dir) / "analysis")
                           : std::filesystem::path(out_dir_flag);
  std::filesystem::create_directories(out_dir);
  write_file_or_die(out_dir / "cluster_report.json",
                    cluster_report_to_json_string(result.clusters));
  write_file_or_die(out_dir / "scatter.csv",
                    scatter_csv(corpus, result.layout.coords, result.clusters.labels));
  write_file_or_die(out_dir / "scatter.svg",
                    render_scatter_svg(corpus, result.layout.coords, result.clusters.labels));
  std::cout << "clustered " << corpus.size() << " documents into " << result.clusters.k
            << " clusters (inertia " << result.clusters.inertia << ")\n";
  if (result.has_shift) {
    write_file_or_die(out_dir / "shift_report.json",
                      shift_report_to_json_string(result.shift));
    std::cout << "condition shift written (both arms present)\n";
  } else {
    std::cout << "condition shift skipped: only one condition present\n";
  }
  std::cout << "wrote " << (out_dir / "cluster_report.json").string() << "\n";
  return kExitOk;
}

int cmd_report(const CommonOpts& common, const std::vector<std::string>& run_dirs,
               const std::string& out_dir_flag) {
  CliConfig config = common.load();
  config.validate();
  const std::filesystem::path out_dir =
      out_dir_flag.empty() ? (std::filesystem::path(config.output_dir) / "figures")
                           : std::filesystem::path(out_dir_flag);
  const std::vector<std::filesystem::path> dirs(run_dirs.begin(), run_dirs.end());
  const auto written = write_report(dirs, out_dir);
  for (const auto& f : written) std::cout << "wrote " << f.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"home battery arbitrage laboratory"};
  app.set_version_flag("--version", std::string(agentlab::kCodeVersion));
  app.require_subcommand(1);

  CommonOpts common;

  auto* solve = app.add_subcommand("solve-dp", "solve the benchmark policies and print both expectations");
  int horizon_override = 0;
  double s0_override = -1.0;
  std::string dp_out;
  solve->add_option("--config", common.config_file, "JSON config file");
  solve->add_option("-T,--horizon", horizon_override, "override horizon (days)")
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  solve->add_option("--s0", s0_override, "override initial charge (kWh)")
      ->check(CLI::NonNegativeNumber);
  solve->add_option("--out", dp_out, "write the solved tables as JSON");

  auto* sim = app.add_subcommand("simulate", "run repetitions of a policy or agent");
  std::string policy_name = "greedy";
  std::string persona_id;
  std::string backend_spec;
  std::uint64_t path_seed = 1000;
  std::string path_file;
  bool blackout = false;
  bool paired = false;
  int reps_override = 0;
  std::uint64_t seed_override = 0;
  std::string run_id_override;
  sim->add_option("--config", common.config_file, "JSON config file");
  sim->add_option("--policy", policy_name, "dp | greedy | agent")->capture_default_str();
  sim->add_option("--persona", persona_id, "persona id for agent runs (default thinker)");
  sim->add_option("--backend", backend_spec,
                  "mock:greedy|mock:hold|mock:dp|mock:reserve|mock:shift|http "
                  "(default mock:greedy)");
  sim->add_option("--path-seed", path_seed, "sample a fresh path per repetition from this seed")
      ->capture_default_str();
  sim->add_option("--path-file", path_file, "fixed price path, whitespace-separated cents");
  sim->add_flag("--blackout", blackout, "apply the configured blackout days");
  sim->add_flag("--paired", paired, "run treatment and control arms on shared paths");
  sim->add_option("--reps", reps_override, "override repetition count")
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  sim->add_option("--seed", seed_override, "override base seed");
  sim->add_option("--run-id", run_id_override, "override the run directory name");

  auto* scan = app.add_subcommand("scan", "grade sampled price paths by difficulty");
  int n_paths = 2000;
  std::uint64_t scan_seed = 7;
  std::string scan_out;
  scan->add_option("--config", common.config_file, "JSON config file");
  scan->add_option("--n-paths", n_paths, "number of paths to sample")->capture_default_str();
  scan->add_option("--seed", scan_seed, "first path seed")->capture_default_str();
  scan->add_option("--out", scan_out, "CSV output path (default <output_dir>/scan.csv)");

  auto* analyze = app.add_subcommand("analyze", "cluster transcripts and compute shifts");
  std::vector<std::string> analyze_runs;
  int k_override = 0;
  std::string mode = "tfidf";
  std::string analyze_out;
  analyze->add_option("--config", common.config_file, "JSON config file");
  analyze->add_option("--runs", analyze_runs, "run directories to analyze")->required();
  analyze->add_option("--k", k_override, "override cluster count");
  analyze->add_option("--mode", mode, "tfidf | embed")->capture_default_str();
  analyze->add_option("--out-dir", analyze_out, "output directory");

  auto* report = app.add_subcommand("report", "render SVG/CSV figures from runs");
  std::vector<std::string> report_runs;
  std::string report_out;
  report->add_option("--config", common.config_file, "JSON config file");
  report->add_option("--runs", report_runs, "run directories to plot")->required();
  report->add_option("--out-dir", report_out, "output directory");

  auto* show = app.add_subcommand("show-config", "print the effective configuration");
  show->add_option("--config", common.config_file, "JSON config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (solve->parsed())
      return cmd_solve_dp(common, horizon_override, s0_override, dp_out);
    if (sim->parsed())
      return cmd_simulate(common, policy_name, persona_id, backend_spec, path_seed, path_file,
                          blackout, paired, reps_override, seed_override, run_id_override);
    if (scan->parsed()) return cmd_scan(common, n_paths, scan_seed, scan_out);
    if (analyze->parsed())
      return cmd_analyze(common, analyze_runs, k_override, mode, analyze_out);
    if (report->parsed()) return cmd_report(common, report_runs, report_out);
    if (show->parsed()) {
      agentlab::CliConfig config = common.load();
      config.validate();
      std::cout << agentlab::cli_config_to_json_string(config);
      return kExitOk;
    }
  } catch (const agentlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const agentlab::BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const agentlab::ParseError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const agentlab::Error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitConfig;
}
