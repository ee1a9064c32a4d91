#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "agentlab/analytics.hpp"
#include "agentlab/errors.hpp"
#include "agentlab/rng.hpp"

namespace agentlab {

namespace {

constexpr double kProbFloor = 1e-12;

std::vector<double> squared_distances(const std::vector<std::vector<double>>& X) {
  const std::size_t n = X.size();
  std::vector<double> d2(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < X[i].size(); ++c) {
        const double diff = X[i][c] - X[j][c];
        s += diff * diff;
      }
      d2[i * n + j] = s;
      d2[j * n + i] = s;
    }
  }
  return d2;
}

// Conditional distribution row for point i at the given precision
// (beta = 1/(2 sigma^2)). Returns the Shannon entropy in nats.
double fill_row(const std::vector<double>& d2, std::size_t n, std::size_t i, double beta,
                std::vector<double>& row) {
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) {
      row[j] = 0.0;
      continue;
    }
    row[j] = std::exp(-beta * d2[i * n + j]);
    sum += row[j];
  }
  if (sum <= 0.0) {
    // All neighbors at infinite precision; fall back to uniform.
    for (std::size_t j = 0; j < n; ++j) row[j] = (j == i) ? 0.0 : 1.0 / double(n - 1);
    return std::log(double(n - 1));
  }
  double entropy = 0.0;
  double weighted_d = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    weighted_d += row[j] * d2[i * n + j];
    row[j] /= sum;
  }
  entropy = std::log(sum) + beta * weighted_d / sum;
  return entropy;
}

}  // namespace

TsneResult tsne(const std::vector<std::vector<double>>& matrix, const TsneOptions& opts) {
  const std::size_t n = matrix.size();
  if (n < 5) throw TooFewPoints("t-SNE needs at least 5 points, got " + std::to_string(n));
  if (opts.perplexity < 1.0) throw ConfigError("perplexity must be >= 1");
  if (opts.iterations < 1) throw ConfigError("iteration count must be >= 1");

  double perplexity = opts.perplexity;
  if (double(n) < 3.0 * perplexity)
    perplexity = std::max(1.0, std::floor(double(n - 1) / 3.0));

  const std::vector<double> d2 = squared_distances(matrix);
  const double target_entropy = std::log(perplexity);

  // Per-point bandwidth search, then symmetrize into the joint P.
  std::vector<double> P(n * n, 0.0);
  std::vector<double> row(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double beta = 1.0;
    double beta_min = 0.0;
    double beta_max = std::numeric_limits<double>::infinity();
    double entropy = fill_row(d2, n, i, beta, row);
    for (int it = 0; it < 200 && std::abs(entropy - target_entropy) > 1e-5; ++it) {
      if (entropy > target_entropy) {
        beta_min = beta;
        beta = std::isinf(beta_max) ? beta * 2.0 : (beta + beta_max) / 2.0;
      } else {
        beta_max = beta;
        beta = (beta + beta_min) / 2.0;
      }
      entropy = fill_row(d2, n, i, beta, row);
    }
    for (std::size_t j = 0; j < n; ++j) P[i * n + j] = row[j];
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = (P[i * n + j] + P[j * n + i]) / (2.0 * double(n));
      P[i * n + j] = std::max(p, kProbFloor);
      P[j * n + i] = P[i * n + j];
    }
    P[i * n + i] = 0.0;
  }

  std::mt19937_64 rng(opts.seed);
  std::vector<std::array<double, 2>> Y(n);
  for (auto& y : Y) {
    y[0] = standard_normal(rng) * 1e-4;
    y[1] = standard_normal(rng) * 1e-4;
  }

  TsneResult result;
  result.used_perplexity = perplexity;
  result.kl_trace.reserve(static_cast<std::size_t>(opts.iterations));

  std::vector<std::array<double, 2>> velocity(n, {0.0, 0.0});
  std::vector<double> Qnum(n * n, 0.0);  // (1 + ||yi-yj||^2)^-1
  for (int iter = 1; iter <= opts.iterations; ++iter) {
    const bool exaggerating = iter <= opts.exaggeration_iters;
    const double p_scale = exaggerating ? opts.early_exaggeration : 1.0;
    const double momentum = exaggerating ? 0.5 : 0.8;

    double Z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dy0 = Y[i][0] - Y[j][0];
        const double dy1 = Y[i][1] - Y[j][1];
        const double q = 1.0 / (1.0 + dy0 * dy0 + dy1 * dy1);
        Qnum[i * n + j] = q;
        Qnum[j * n + i] = q;
        Z += 2.0 * q;
      }
    }
    if (Z <= 0.0) Z = kProbFloor;

    double kl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double g0 = 0.0;
      double g1 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double q = std::max(Qnum[i * n + j] / Z, kProbFloor);
        const double p = P[i * n + j];
        const double coeff = (p_scale * p - q) * Qnum[i * n + j];
        g0 += coeff * (Y[i][0] - Y[j][0]);
        g1 += coeff * (Y[i][1] - Y[j][1]);
        kl += p * std::log(p / q);
      }
      velocity[i][0] = momentum * velocity[i][0] - opts.learning_rate * 4.0 * g0;
      velocity[i][1] = momentum * velocity[i][1] - opts.learning_rate * 4.0 * g1;
    }
    result.kl_trace.push_back(kl);

    double mean0 = 0.0;
    double mean1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Y[i][0] += velocity[i][0];
      Y[i][1] += velocity[i][1];
      mean0 += Y[i][0];
      mean1 += Y[i][1];
    }
    mean0 /= double(n);
    mean1 /= double(n);
    for (auto& y : Y) {
      y[0] -= mean0;
      y[1] -= mean1;
    }
  }

  result.coords = std::move(Y);
  return result;
}

TsneResult tsne(const VectorSet& vectors, const TsneOptions& opts) {
  return tsne(vectors.matrix, opts);
}

}  // namespace agentlab
