#include <algorithm>
#include <cstdio>
#include <sstream>

#include "agentlab/analytics.hpp"
#include "agentlab/errors.hpp"
#include "agentlab/storage.hpp"
#include "json.hpp"

namespace agentlab {

std::string to_string(Condition c) {
  return c == Condition::Normal ? "normal" : "blackout";
}

std::vector<Document> load_documents(const std::vector<std::filesystem::path>& run_dirs) {
  std::vector<Document> docs;
  for (const auto& dir : run_dirs) {
    const LoadedRun run = load_run(dir);
    const Condition condition = run.manifest.spec.intervention.blackout_days.empty()
                                    ? Condition::Normal
                                    : Condition::Blackout;
    for (const DayRecord& r : run.records) {
      std::string text;
      for (const std::string* part : {&r.thoughts, &r.reflection, &r.journal}) {
        if (part->empty()) continue;
        if (!text.empty()) text += ' ';
        text += *part;
      }
      if (text.empty()) continue;  // benchmark runs carry no prose
      Document d;
      d.doc_id = r.run_id + "/r" + std::to_string(r.repetition) + "/d" + std::to_string(r.day);
      d.run_id = r.run_id;
      d.persona = r.persona;
      d.day = r.day;
      d.condition = condition;
      d.text = std::move(text);
      docs.push_back(std::move(d));
    }
  }
  return docs;
}

ShiftReport cluster_shift(const std::vector<Document>& corpus, const std::vector<int>& labels,
                          int k) {
  if (labels.size() != corpus.size()) throw ConfigError("labels and corpus sizes differ");
  if (k < 1) throw ConfigError("k must be >= 1");

  std::map<std::string, std::map<Condition, std::vector<double>>> counts;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const int c = labels[i];
    if (c < 0 || c >= k) throw ConfigError("label out of range: " + std::to_string(c));
    auto& hist = counts[corpus[i].persona]
                     .emplace(corpus[i].condition,
                              std::vector<double>(static_cast<std::size_t>(k), 0.0))
                     .first->second;
    hist[static_cast<std::size_t>(c)] += 1.0;
  }

  ShiftReport report;
  report.k = k;
  for (auto& [persona, by_condition] : counts) {
    for (const Condition cond : {Condition::Normal, Condition::Blackout}) {
      const auto it = by_condition.find(cond);
      if (it == by_condition.end())
        throw MissingCondition("persona '" + persona + "' has no documents under the " +
                               to_string(cond) + " condition");
      double total = 0.0;
      for (const double v : it->second) total += v;
      std::vector<double> freq = it->second;
      for (double& v : freq) v /= total;
      report.histograms[persona][cond] = std::move(freq);
    }
    std::vector<double> delta(static_cast<std::size_t>(k), 0.0);
    const auto& blackout = report.histograms[persona][Condition::Blackout];
    const auto& normal = report.histograms[persona][Condition::Normal];
    for (std::size_t c = 0; c < delta.size(); ++c) delta[c] = blackout[c] - normal[c];
    report.deltas[persona] = std::move(delta);
  }
  return report;
}

AnalysisResult analyze_documents(const std::vector<Document>& corpus,
                                 const AnalysisOptions& opts) {
  if (corpus.empty()) throw EmptyVocabulary("no documents to analyze");

  AnalysisResult result;
  result.vectors = (opts.embedder != nullptr)
                       ? embedding_matrix(corpus, *opts.embedder, opts.embedding_model)
                       : tfidf_matrix(corpus, opts.stopwords);

  const int max_dims = static_cast<int>(
      std::min(result.vectors.rows(), result.vectors.dim()));
  const int dims = std::max(1, std::min(opts.pca_dims, max_dims));
  result.reduced = pca(result.vectors, dims);

  TsneOptions topts;
  topts.perplexity = opts.perplexity;
  topts.iterations = opts.tsne_iterations;
  topts.seed = opts.seed;
  result.layout = tsne(result.reduced.projected, topts);

  KmeansOptions kopts;
  kopts.k = opts.k;
  kopts.seed = opts.seed;
  if (opts.cluster_in_tsne_space) {
    std::vector<std::vector<double>> coords;
    coords.reserve(result.layout.coords.size());
    for (const auto& y : result.layout.coords) coords.push_back({y[0], y[1]});
    result.clusters = kmeans(coords, kopts);
  } else {
    result.clusters = kmeans(result.vectors.matrix, kopts);
  }
  result.clusters.keywords =
      cluster_keywords(corpus, result.clusters.labels, opts.k, opts.stopwords, opts.top_m);

  bool has_normal = false;
  bool has_blackout = false;
  for (const Document& d : corpus) {
    has_normal = has_normal || d.condition == Condition::Normal;
    has_blackout = has_blackout || d.condition == Condition::Blackout;
  }
  result.has_shift = has_normal && has_blackout;
  if (result.has_shift)
    result.shift = cluster_shift(corpus, result.clusters.labels, opts.k);
  return result;
}

std::string cluster_report_to_json_string(const ClusterReport& report) {
  nlohmann::ordered_json j;
  j["k"] = report.k;
  j["inertia"] = report.inertia;
  j["labels"] = report.labels;
  j["keywords"] = nlohmann::ordered_json::array();
  for (const auto& cluster : report.keywords) {
    nlohmann::ordered_json terms = nlohmann::ordered_json::array();
    for (const auto& [term, score] : cluster)
      terms.push_back({{"term", term}, {"score", score}});
    j["keywords"].push_back(std::move(terms));
  }
  j["centroid_dim"] = report.centroids.empty() ? 0 : report.centroids.front().size();
  j["inertia_trace"] = report.inertia_trace;
  return j.dump(2) + "\n";
}

std::string shift_report_to_json_string(const ShiftReport& report) {
  nlohmann::ordered_json j;
  j["k"] = report.k;
  j["personas"] = nlohmann::ordered_json::object();
  for (const auto& [persona, by_condition] : report.histograms) {
    nlohmann::ordered_json entry;
    for (const auto& [cond, freq] : by_condition) entry[to_string(cond)] = freq;
    entry["delta_blackout_minus_normal"] = report.deltas.at(persona);
    j["personas"][persona] = std::move(entry);
  }
  return j.dump(2) + "\n";
}

std::string scatter_csv(const std::vector<Document>& corpus,
                        const std::vector<std::array<double, 2>>& coords,
                        const std::vector<int>& labels) {
  if (coords.size() != corpus.size() || labels.size() != corpus.size())
    throw ConfigError("scatter rows misaligned with corpus");
  std::ostringstream csv;
  csv << "doc_id,persona,condition,x,y,label\n";
  char buf[64];
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    csv << corpus[i].doc_id << ',' << corpus[i].persona << ','
        << to_string(corpus[i].condition) << ',';
    std::snprintf(buf, sizeof(buf), "%.6f", coords[i][0]);
    csv << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.6f", coords[i][1]);
    csv << buf << ',' << labels[i] << "\n";
  }
  return csv.str();
}

}  // namespace agentlab
