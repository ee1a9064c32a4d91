#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "agentlab/backend.hpp"

namespace agentlab {

enum class Condition { Normal, Blackout };
std::string to_string(Condition c);

// One agent-day of text. Condition is the run's arm: runs executed with an
// empty blackout schedule are Normal, anything else is Blackout.
struct Document {
  std::string doc_id;  // "<run_id>/r<rep>/d<day>"
  std::string run_id;
  std::string persona;
  int day = 0;
  Condition condition = Condition::Normal;
  std::string text;  // thoughts + reflection + journal, space-joined
};

// Loads every run directory and turns each textual record into a Document.
// Records without text (benchmark policies) are skipped.
std::vector<Document> load_documents(const std::vector<std::filesystem::path>& run_dirs);

// Lowercase, split on non-alphanumerics, drop tokens shorter than 2 chars
// and stopwords.
std::vector<std::string> tokenize(const std::string& text,
                                  const std::set<std::string>& stopwords);

std::set<std::string> load_stopwords(const std::filesystem::path& file);

enum class VectorSource { TfIdf, ExternalEmbedding };

struct VectorSet {
  std::vector<std::vector<double>> matrix;  // n_docs x dim
  std::vector<std::string> vocab;           // TfIdf mode; sorted
  VectorSource source = VectorSource::TfIdf;
  std::string embedding_model;  // ExternalEmbedding mode

  std::size_t rows() const { return matrix.size(); }
  std::size_t dim() const { return matrix.empty() ? 0 : matrix.front().size(); }
};

// tf = raw count, idf = ln((1+N)/(1+df)) + 1, rows L2-normalized.
// Throws EmptyVocabulary when nothing survives tokenization.
VectorSet tfidf_matrix(const std::vector<Document>& corpus,
                       const std::set<std::string>& stopwords);

// Same rows/order as the corpus, vectors fetched from an embeddings endpoint.
VectorSet embedding_matrix(const std::vector<Document>& corpus, EmbeddingBackend& backend,
                           const std::string& model_name);

struct PcaResult {
  std::vector<std::vector<double>> projected;     // n x k
  std::vector<std::vector<double>> components;    // k x dim, orthonormal rows
  std::vector<double> explained_variance_ratio;   // non-increasing, sums <= 1
  std::vector<double> mean;                       // column means, length dim
  bool rank_deficient = false;
};

// Mean-centered principal components via eigendecomposition of the
// covariance (or its Gram dual when dim > n). k <= min(n, dim).
PcaResult pca(const std::vector<std::vector<double>>& matrix, int k);
PcaResult pca(const VectorSet& vectors, int k);

struct TsneOptions {
  double perplexity = 30.0;
  int iterations = 1000;
  std::uint64_t seed = 1;
  double learning_rate = 200.0;
  double early_exaggeration = 12.0;
  int exaggeration_iters = 250;
};

struct TsneResult {
  std::vector<std::array<double, 2>> coords;
  std::vector<double> kl_trace;  // KL divergence entering each iteration
  double used_perplexity = 0.0;  // after any auto-lowering
};

// Exact O(n^2) t-SNE. Perplexity is lowered to floor((n-1)/3) when the
// corpus is too small for the requested value; fewer than 5 points throws
// TooFewPoints.
TsneResult tsne(const std::vector<std::vector<double>>& matrix, const TsneOptions& opts = {});
TsneResult tsne(const VectorSet& vectors, const TsneOptions& opts = {});

struct KmeansOptions {
  int k = 5;
  std::uint64_t seed = 1;
  int max_iter = 300;
  double tol = 1e-6;
};

struct ClusterReport {
  int k = 0;
  std::vector<int> labels;                      // per document, 0..k-1
  std::vector<std::vector<double>> centroids;   // k x dim
  // Per cluster: top terms by mean TF-IDF weight inside the cluster.
  std::vector<std::vector<std::pair<std::string, double>>> keywords;
  double inertia = 0.0;
  std::vector<double> inertia_trace;  // per Lloyd iteration, non-increasing
};

// Seeded k-means++ then Lloyd iterations; empty clusters are re-seeded to
// the farthest point. Deterministic for a given seed.
ClusterReport kmeans(const std::vector<std::vector<double>>& matrix,
                     const KmeansOptions& opts = {});

// Scores terms by mean TF-IDF weight within each cluster; top_m per cluster,
// ties broken lexicographically.
std::vector<std::vector<std::pair<std::string, double>>> cluster_keywords(
    const std::vector<Document>& corpus, const std::vector<int>& labels, int k,
    const std::set<std::string>& stopwords, int top_m = 9);

struct ShiftReport {
  int k = 0;
  // persona -> condition -> normalized cluster frequencies (length k).
  std::map<std::string, std::map<Condition, std::vector<double>>> histograms;
  // persona -> per-cluster frequency delta, Blackout minus Normal.
  std::map<std::string, std::vector<double>> deltas;
};

// Throws MissingCondition when a persona appears under only one condition.
ShiftReport cluster_shift(const std::vector<Document>& corpus, const std::vector<int>& labels,
                          int k);

struct AnalysisOptions {
  int k = 5;
  int top_m = 9;
  double perplexity = 30.0;
  int tsne_iterations = 1000;
  int pca_dims = 50;
  std::uint64_t seed = 1;
  bool cluster_in_tsne_space = false;  // default clusters on the full vectors
  std::set<std::string> stopwords;
  EmbeddingBackend* embedder = nullptr;  // non-null switches to embedding mode
  std::string embedding_model;
};

struct AnalysisResult {
  VectorSet vectors;
  PcaResult reduced;
  TsneResult layout;
  ClusterReport clusters;
  ShiftReport shift;
  bool has_shift = false;  // false when only one condition is present
};

// The full pipeline: vectorize, PCA, t-SNE on the reduced vectors, k-means,
// keywords, and (when both arms are present) the condition shift.
AnalysisResult analyze_documents(const std::vector<Document>& corpus,
                                 const AnalysisOptions& opts);

std::string cluster_report_to_json_string(const ClusterReport& report);
std::string shift_report_to_json_string(const ShiftReport& report);

// (doc_id, x, y, label) rows for scatter plotting.
std::string scatter_csv(const std::vector<Document>& corpus,
                        const std::vector<std::array<double, 2>>& coords,
                        const std::vector<int>& labels);

}  // namespace agentlab
