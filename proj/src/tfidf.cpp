#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>

#include "agentlab/analytics.hpp"
#include "agentlab/errors.hpp"

namespace agentlab {

std::vector<std::string> tokenize(const std::string& text,
                                  const std::set<std::string>& stopwords) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.size() >= 2 && stopwords.find(current) == stopwords.end())
      tokens.push_back(current);
    current.clear();
  };
  for (const char ch : text) {
    const auto uc = static_cast<unsigned char>(ch);
    if (std::isalnum(uc))
      current.push_back(static_cast<char>(std::tolower(uc)));
    else
      flush();
  }
  flush();
  return tokens;
}

std::set<std::string> load_stopwords(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open stopword list: " + file.string());
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    words.insert(line);
  }
  return words;
}

namespace {

// Per-document token counts plus the corpus document frequency per term.
struct Counts {
  std::vector<std::map<std::string, int>> per_doc;
  std::map<std::string, int> df;
};

Counts count_corpus(const std::vector<Document>& corpus,
                    const std::set<std::string>& stopwords) {
  Counts counts;
  counts.per_doc.resize(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (const std::string& tok : tokenize(corpus[i].text, stopwords))
      counts.per_doc[i][tok]++;
    for (const auto& [term, n] : counts.per_doc[i]) {
      (void)n;
      counts.df[term]++;
    }
  }
  return counts;
}

}  // namespace

VectorSet tfidf_matrix(const std::vector<Document>& corpus,
                       const std::set<std::string>& stopwords) {
  if (corpus.empty()) throw EmptyVocabulary("corpus is empty");
  const Counts counts = count_corpus(corpus, stopwords);
  if (counts.df.empty())
    throw EmptyVocabulary("no tokens survive tokenization across " +
                          std::to_string(corpus.size()) + " documents");

  VectorSet out;
  out.source = VectorSource::TfIdf;
  out.vocab.reserve(counts.df.size());
  std::map<std::string, std::size_t> column;
  std::vector<double> idf;
  const double n_docs = static_cast<double>(corpus.size());
  for (const auto& [term, df] : counts.df) {
    column[term] = out.vocab.size();
    out.vocab.push_back(term);
    idf.push_back(std::log((1.0 + n_docs) / (1.0 + static_cast<double>(df))) + 1.0);
  }

  out.matrix.assign(corpus.size(), std::vector<double>(out.vocab.size(), 0.0));
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    double norm_sq = 0.0;
    for (const auto& [term, tf] : counts.per_doc[i]) {
      const double w = static_cast<double>(tf) * idf[column[term]];
      out.matrix[i][column[term]] = w;
      norm_sq += w * w;
    }
    if (norm_sq > 0.0) {
      const double inv = 1.0 / std::sqrt(norm_sq);
      for (double& v : out.matrix[i]) v *= inv;
    }
  }
  return out;
}

VectorSet embedding_matrix(const std::vector<Document>& corpus, EmbeddingBackend& backend,
                           const std::string& model_name) {
  if (corpus.empty()) throw EmptyVocabulary("corpus is empty");
  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (const Document& d : corpus) texts.push_back(d.text);
  VectorSet out;
  out.matrix = backend.embed(texts);
  out.source = VectorSource::ExternalEmbedding;
  out.embedding_model = model_name;
  for (const auto& row : out.matrix)
    if (row.size() != out.matrix.front().size())
      throw BackendError(BackendError::Category::Format, 0,
                         "embedding rows have inconsistent dimensions");
  return out;
}

std::vector<std::vector<std::pair<std::string, double>>> cluster_keywords(
    const std::vector<Document>& corpus, const std::vector<int>& labels, int k,
    const std::set<std::string>& stopwords, int top_m) {
  if (labels.size() != corpus.size())
    throw ConfigError("labels and corpus sizes differ");
  const VectorSet tfidf = tfidf_matrix(corpus, stopwords);

  std::vector<std::vector<double>> mean_weight(
      static_cast<std::size_t>(k), std::vector<double>(tfidf.vocab.size(), 0.0));
  std::vector<int> members(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const int c = labels[i];
    if (c < 0 || c >= k) throw ConfigError("label out of range: " + std::to_string(c));
    ++members[static_cast<std::size_t>(c)];
    for (std::size_t j = 0; j < tfidf.vocab.size(); ++j)
      mean_weight[static_cast<std::size_t>(c)][j] += tfidf.matrix[i][j];
  }

  std::vector<std::vector<std::pair<std::string, double>>> out(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    const auto cu = static_cast<std::size_t>(c);
    if (members[cu] == 0) continue;
    std::vector<std::pair<std::string, double>> scored;
    for (std::size_t j = 0; j < tfidf.vocab.size(); ++j) {
      const double score = mean_weight[cu][j] / members[cu];
      if (score > 0.0) scored.emplace_back(tfidf.vocab[j], score);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    if (scored.size() > static_cast<std::size_t>(top_m))
      scored.resize(static_cast<std::size_t>(top_m));
    out[cu] = std::move(scored);
  }
  return out;
}

}  // namespace agentlab
