#include "agentlab/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "agentlab/errors.hpp"
#include "json.hpp"

namespace agentlab {

namespace {

using nlohmann::json;

WattHours kwh_to_wh(double kwh, const char* field) {
  const double wh = kwh * 1000.0;
  const double rounded = std::round(wh);
  if (std::abs(wh - rounded) > 1e-6)
    throw ConfigError(std::string(field) + " must be a whole number of watt-hours");
  return static_cast<WattHours>(rounded);
}

// Applies `fn` to each present key and rejects keys nobody claimed.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j.is_object()) throw ConfigError("config section '" + name_ + "' must be an object");
  }
  template <typename T, typename Setter>
  void take(const char* key, Setter setter) {
    if (auto it = j_.find(key); it != j_.end()) {
      try {
        setter(it->get<T>());
      } catch (const json::exception& e) {
        throw ConfigError("config key '" + name_ + "." + key + "': " + e.what());
      }
      seen_.push_back(key);
    }
  }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      bool known = false;
      for (const auto& s : seen_)
        if (s == it.key()) known = true;
      if (!known)
        throw ConfigError("unknown config key '" + name_ + "." + it.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::vector<std::string> seen_;
};

}  // namespace

void CliConfig::validate() const {
  cfg.validate();
  model.validate();
  chat.validate();
  if (repetitions < 1 || benchmark_repetitions < 1)
    throw ConfigError("repetition counts must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (k < 1) throw ConfigError("cluster count must be >= 1");
  if (perplexity < 1.0) throw ConfigError("perplexity must be >= 1");
  if (tsne_iterations < 1 || pca_dims < 1 || top_m < 1)
    throw ConfigError("analysis iteration/dimension counts must be >= 1");
  for (const int d : blackout_days)
    if (d < 1)
      throw ConfigError("blackout day " + std::to_string(d) + " must be >= 1");
  // days beyond the horizon are checked where a schedule is actually applied,
  // so shrinking the horizon never invalidates the default schedule
}

CliConfig load_cli_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file: " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");

  CliConfig c;
  Section root(j, "root");
  root.take<json>("battery", [&](const json& b) {
    Section s(b, "battery");
    s.take<double>("capacity_kwh", [&](double v) { c.cfg.capacity_wh = kwh_to_wh(v, "capacity_kwh"); });
    s.take<double>("floor_kwh", [&](double v) { c.cfg.floor_wh = kwh_to_wh(v, "floor_kwh"); });
    s.take<double>("initial_soc_kwh", [&](double v) { c.cfg.initial_soc_wh = kwh_to_wh(v, "initial_soc_kwh"); });
    s.take<double>("unit_kwh", [&](double v) { c.cfg.unit_wh = kwh_to_wh(v, "unit_kwh"); });
    s.take<int>("horizon_days", [&](int v) { c.cfg.horizon_days = v; });
    s.finish();
  });
  root.take<json>("prices", [&](const json& p) {
    Section s(p, "prices");
    s.take<std::int64_t>("low_cents", [&](std::int64_t v) { c.model.low_cents = v; });
    s.take<std::int64_t>("high_cents", [&](std::int64_t v) { c.model.high_cents = v; });
    s.take<double>("prob_high", [&](double v) { c.model.prob_high = v; });
    s.finish();
  });
  root.take<json>("run", [&](const json& r) {
    Section s(r, "run");
    s.take<int>("repetitions", [&](int v) { c.repetitions = v; });
    s.take<int>("benchmark_repetitions", [&](int v) { c.benchmark_repetitions = v; });
    s.take<std::uint64_t>("base_seed", [&](std::uint64_t v) { c.base_seed = v; });
    s.take<int>("workers", [&](int v) { c.workers = v; });
    s.take<std::vector<int>>("blackout_days", [&](std::vector<int> v) { c.blackout_days = std::move(v); });
    s.take<std::string>("output_dir", [&](std::string v) { c.output_dir = std::move(v); });
    s.finish();
  });
  root.take<json>("analysis", [&](const json& a) {
    Section s(a, "analysis");
    s.take<int>("k", [&](int v) { c.k = v; });
    s.take<int>("top_m", [&](int v) { c.top_m = v; });
    s.take<double>("perplexity", [&](double v) { c.perplexity = v; });
    s.take<int>("tsne_iterations", [&](int v) { c.tsne_iterations = v; });
    s.take<int>("pca_dims", [&](int v) { c.pca_dims = v; });
    s.take<bool>("cluster_in_tsne_space", [&](bool v) { c.cluster_in_tsne_space = v; });
    s.take<std::string>("stopwords_file", [&](std::string v) { c.stopwords_file = std::move(v); });
    s.finish();
  });
  root.take<std::string>("personas_dir", [&](std::string v) { c.personas_dir = std::move(v); });
  root.take<json>("backend", [&](const json& b) {
    Section s(b, "backend");
    s.take<std::string>("base_url", [&](std::string v) { c.http_base_url = std::move(v); });
    s.take<std::string>("chat_model", [&](std::string v) { c.chat_model = std::move(v); });
    s.take<std::string>("embed_model", [&](std::string v) { c.embed_model = std::move(v); });
    s.take<double>("temperature", [&](double v) { c.chat.temperature = v; });
    s.take<int>("max_tokens", [&](int v) { c.chat.max_tokens = v; });
    s.take<int>("timeout_ms", [&](int v) { c.chat.timeout_ms = v; });
    s.take<int>("max_retries", [&](int v) { c.chat.max_retries = v; });
    s.take<int>("backoff_base_ms", [&](int v) { c.chat.backoff_base_ms = v; });
    s.take<int>("max_inflight", [&](int v) { c.chat.max_inflight = v; });
    s.finish();
  });
  root.finish();

  c.validate();
  return c;
}

std::string cli_config_to_json_string(const CliConfig& c) {
  nlohmann::ordered_json j;
  j["battery"] = {{"capacity_kwh", c.cfg.capacity_wh / 1000.0},
                  {"floor_kwh", c.cfg.floor_wh / 1000.0},
                  {"initial_soc_kwh", c.cfg.initial_soc_wh / 1000.0},
                  {"unit_kwh", c.cfg.unit_wh / 1000.0},
                  {"horizon_days", c.cfg.horizon_days}};
  j["prices"] = {{"low_cents", c.model.low_cents},
                 {"high_cents", c.model.high_cents},
                 {"prob_high", c.model.prob_high}};
  j["run"] = {{"repetitions", c.repetitions},
              {"benchmark_repetitions", c.benchmark_repetitions},
              {"base_seed", c.base_seed},
              {"workers", c.workers},
              {"blackout_days", c.blackout_days},
              {"output_dir", c.output_dir}};
  j["analysis"] = {{"k", c.k},
                   {"top_m", c.top_m},
                   {"perplexity", c.perplexity},
                   {"tsne_iterations", c.tsne_iterations},
                   {"pca_dims", c.pca_dims},
                   {"cluster_in_tsne_space", c.cluster_in_tsne_space},
                   {"stopwords_file", c.stopwords_file}};
  j["personas_dir"] = c.personas_dir;
  j["backend"] = {{"base_url", c.http_base_url},
                  {"chat_model", c.chat_model},
                  {"embed_model", c.embed_model},
                  {"temperature", c.chat.temperature},
                  {"max_tokens", c.chat.max_tokens},
                  {"timeout_ms", c.chat.timeout_ms},
                  {"max_retries", c.chat.max_retries},
                  {"backoff_base_ms", c.chat.backoff_base_ms},
                  {"max_inflight", c.chat.max_inflight}};
  return j.dump(2) + "\n";
}

}  // namespace agentlab
