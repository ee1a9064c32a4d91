#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "agentlab/analytics.hpp"
#include "agentlab/config.hpp"
#include "agentlab/harness.hpp"
#include "agentlab/policy.hpp"
#include "agentlab/version.hpp"

namespace py = pybind11;
using namespace agentlab;

namespace {

BatteryConfig make_cfg(double capacity_kwh, double floor_kwh, double initial_soc_kwh,
                       double unit_kwh, int horizon_days) {
  BatteryConfig cfg;
  cfg.capacity_wh = static_cast<WattHours>(capacity_kwh * 1000.0 + 0.5);
  cfg.floor_wh = static_cast<WattHours>(floor_kwh * 1000.0 + 0.5);
  cfg.initial_soc_wh = static_cast<WattHours>(initial_soc_kwh * 1000.0 + 0.5);
  cfg.unit_wh = static_cast<WattHours>(unit_kwh * 1000.0 + 0.5);
  cfg.horizon_days = horizon_days;
  cfg.validate();
  return cfg;
}

py::dict stats_to_dict(const RunResult& r) {
  py::dict d;
  d["run_id"] = r.manifest.run_id;
  d["run_dir"] = r.run_dir.string();
  d["successes"] = r.stats.success_count;
  d["failures"] = r.stats.failure_count;
  d["mean_terminal_reward_cents"] = r.stats.mean_terminal_reward_cents;
  d["sd_terminal_reward_cents"] = r.stats.sd_terminal_reward_cents;
  d["mean_soc_kwh_by_day"] = r.stats.mean_soc_kwh_by_day;
  d["terminal_soc_histogram"] = r.stats.terminal_soc_histogram;
  return d;
}

}  // namespace

PYBIND11_MODULE(_agentlab, m) {
  m.doc() = "home battery arbitrage laboratory (native core)";
  m.attr("__version__") = kCodeVersion;

  py::register_exception<Error>(m, "AgentlabError");

  py::class_<PriceModel>(m, "PriceModel")
      .def(py::init([](Cents low_cents, Cents high_cents, double prob_high) {
             PriceModel pm;
             pm.low_cents = low_cents;
             pm.high_cents = high_cents;
             pm.prob_high = prob_high;
             pm.validate();
             return pm;
           }),
           py::arg("low_cents") = 500, py::arg("high_cents") = 1000,
           py::arg("prob_high") = 0.5)
      .def_readonly("low_cents", &PriceModel::low_cents)
      .def_readonly("high_cents", &PriceModel::high_cents)
      .def_readonly("prob_high", &PriceModel::prob_high);

  py::class_<BatteryConfig>(m, "BatteryConfig")
      .def(py::init(&make_cfg), py::arg("capacity_kwh") = 10.0, py::arg("floor_kwh") = 0.0,
           py::arg("initial_soc_kwh") = 5.0, py::arg("unit_kwh") = 1.0,
           py::arg("horizon_days") = 20)
      .def_readonly("capacity_wh", &BatteryConfig::capacity_wh)
      .def_readonly("floor_wh", &BatteryConfig::floor_wh)
      .def_readonly("initial_soc_wh", &BatteryConfig::initial_soc_wh)
      .def_readonly("unit_wh", &BatteryConfig::unit_wh)
      .def_readonly("horizon_days", &BatteryConfig::horizon_days);

  py::class_<DpSolution, std::shared_ptr<DpSolution>>(m, "DpSolution")
      .def("expected_start_value_cents", &DpSolution::expected_start_value_cents)
      .def(
          "action_for",
          [](const DpSolution& dp, int day, double soc_kwh, Cents price_cents) {
            return to_string(dp.action_for(
                day, static_cast<WattHours>(soc_kwh * 1000.0 + 0.5), price_cents));
          },
          py::arg("day"), py::arg("soc_kwh"), py::arg("price_cents"))
      .def("to_json", &DpSolution::to_json_string);

  m.def(
      "solve_dp",
      [](const BatteryConfig& cfg, const PriceModel& model) {
        return std::const_pointer_cast<DpSolution>(solve_dp(cfg, model));
      },
      py::arg("cfg") = BatteryConfig{}, py::arg("model") = PriceModel{});

  m.def(
      "expected_reward",
      [](const std::string& policy, const BatteryConfig& cfg, const PriceModel& model) {
        if (policy == "dp") return solve_dp(cfg, model)->expected_start_value_cents();
        if (policy == "greedy")
          return exact_expected_reward(GreedyPolicy(cfg, model), cfg, model);
        if (policy == "hold") return exact_expected_reward(HoldPolicy{}, cfg, model);
        throw ConfigError("policy must be dp, greedy, or hold");
      },
      py::arg("policy"), py::arg("cfg") = BatteryConfig{}, py::arg("model") = PriceModel{},
      "Exact E[terminal reward] in cents for a benchmark policy.");

  m.def("sample_price_path", &sample_price_path, py::arg("model"), py::arg("horizon_days"),
        py::arg("seed"));

  m.def(
      "complexity_rho",
      [](const PricePath& path, const BatteryConfig& cfg, const PriceModel& model) {
        const ComplexityReport r = complexity_rho(path, cfg, model);
        py::dict d;
        d["rho"] = r.rho;
        d["r_dp_cents"] = r.r_dp_cents;
        d["r_greedy_cents"] = r.r_greedy_cents;
        d["label"] = to_string(r.label);
        return d;
      },
      py::arg("path"), py::arg("cfg") = BatteryConfig{}, py::arg("model") = PriceModel{},
      "Difficulty of one fixed price path from realized policy rewards.");

  m.def(
      "simulate",
      [](const std::string& policy, const std::string& backend, const std::string& persona,
         int repetitions, std::uint64_t base_seed, std::uint64_t path_seed,
         const std::vector<int>& blackout_days, const std::string& out_dir,
         const std::string& run_id, const BatteryConfig& cfg, const PriceModel& model,
         int workers, bool paired) {
        RunSpec spec;
        spec.policy_kind = policy_kind_from_string(policy);
        spec.cfg = cfg;
        spec.model = model;
        spec.scenario = Scenario::sampled(path_seed);
        spec.repetitions = repetitions;
        spec.base_seed = base_seed;
        spec.workers = workers;
        spec.persona_id = persona;
        spec.backend_spec = backend;
        spec.intervention.blackout_days.insert(blackout_days.begin(), blackout_days.end());
        spec.run_id = run_id.empty() ? (policy + "_py") : run_id;
        HarnessOptions opts;
        if (!out_dir.empty()) opts.out_root = out_dir;
        if (paired) {
          const auto [t, c] = run_intervention_pair(spec, opts);
          py::dict d;
          d["treatment"] = stats_to_dict(t);
          d["control"] = stats_to_dict(c);
          return d;
        }
        return stats_to_dict(run_monte_carlo(spec, opts));
      },
      py::arg("policy") = "greedy", py::arg("backend") = "mock:greedy",
      py::arg("persona") = "thinker", py::arg("repetitions") = 40,
      py::arg("base_seed") = 1, py::arg("path_seed") = 1000,
      py::arg("blackout_days") = std::vector<int>{}, py::arg("out_dir") = "",
      py::arg("run_id") = "", py::arg("cfg") = BatteryConfig{},
      py::arg("model") = PriceModel{}, py::arg("workers") = 4, py::arg("paired") = false,
      "Seeded Monte Carlo repetitions of a policy or mock agent.");

  m.def(
      "scan",
      [](int n_paths, std::uint64_t seed, const BatteryConfig& cfg, const PriceModel& model) {
        const ScanResult scan = scan_scenarios(model, cfg, n_paths, seed);
        py::list rows;
        for (const ScanEntry& e : scan.entries) {
          py::dict d;
          d["path_seed"] = e.path_seed;
          d["degenerate"] = e.degenerate;
          if (!e.degenerate) {
            d["rho"] = e.report.rho;
            d["label"] = to_string(e.report.label);
            d["r_dp_cents"] = e.report.r_dp_cents;
            d["r_greedy_cents"] = e.report.r_greedy_cents;
          }
          rows.append(std::move(d));
        }
        return rows;
      },
      py::arg("n_paths"), py::arg("seed") = 7, py::arg("cfg") = BatteryConfig{},
      py::arg("model") = PriceModel{}, "Grade sampled price paths by difficulty.");

  m.def(
      "analyze_runs",
      [](const std::vector<std::filesystem::path>& run_dirs, int k,
         const std::string& stopwords_file, std::uint64_t seed, double perplexity,
         int tsne_iterations, int pca_dims) {
        const std::vector<Document> corpus = load_documents(run_dirs);
        AnalysisOptions opts;
        opts.k = k;
        opts.seed = seed;
        opts.perplexity = perplexity;
        opts.tsne_iterations = tsne_iterations;
        opts.pca_dims = pca_dims;
        if (!stopwords_file.empty()) opts.stopwords = load_stopwords(stopwords_file);
        const AnalysisResult r = analyze_documents(corpus, opts);
        py::dict d;
        d["n_documents"] = corpus.size();
        d["labels"] = r.clusters.labels;
        d["inertia"] = r.clusters.inertia;
        py::list keywords;
        for (const auto& cluster : r.clusters.keywords) {
          py::list terms;
          for (const auto& [term, score] : cluster) terms.append(py::make_tuple(term, score));
          keywords.append(std::move(terms));
        }
        d["keywords"] = std::move(keywords);
        py::list coords;
        for (const auto& y : r.layout.coords) coords.append(py::make_tuple(y[0], y[1]));
        d["coords"] = std::move(coords);
        if (r.has_shift) {
          py::dict deltas;
          for (const auto& [persona, delta] : r.shift.deltas) deltas[persona.c_str()] = delta;
          d["shift_deltas"] = std::move(deltas);
        }
        return d;
      },
      py::arg("run_dirs"), py::arg("k") = 5, py::arg("stopwords_file") = "",
      py::arg("seed") = 1, py::arg("perplexity") = 30.0, py::arg("tsne_iterations") = 1000,
      py::arg("pca_dims") = 50,
      "Cluster the transcripts of one or more persisted runs.");
}
