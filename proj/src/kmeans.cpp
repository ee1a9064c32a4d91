#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "agentlab/analytics.hpp"
#include "agentlab/errors.hpp"
#include "agentlab/rng.hpp"

namespace agentlab {

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double d = a[c] - b[c];
    s += d * d;
  }
  return s;
}

std::size_t weighted_pick(const std::vector<double>& weights, double r01) {
  double total = 0.0;
  for (const double w : weights) total += w;
  if (total <= 0.0) return 0;  // caller handles the all-zero case
  double target = r01 * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    target -= weights[i];
    if (target <= 0.0) return i;
  }
  return weights.size() - 1;
}

}  // namespace

ClusterReport kmeans(const std::vector<std::vector<double>>& matrix,
                     const KmeansOptions& opts) {
  const std::size_t n = matrix.size();
  if (n == 0) throw ConfigError("k-means needs a non-empty matrix");
  if (opts.k < 1 || static_cast<std::size_t>(opts.k) > n)
    throw ConfigError("k must be in 1..n_docs");
  const std::size_t k = static_cast<std::size_t>(opts.k);
  const std::size_t dim = matrix.front().size();

  std::mt19937_64 rng(opts.seed);

  // k-means++ seeding: subsequent centers drawn proportionally to squared
  // distance from the nearest chosen center.
  std::vector<std::vector<double>> centroids;
  centroids.reserve(k);
  const std::size_t first =
      std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * double(n)));
  centroids.push_back(matrix[first]);
  std::vector<double> nearest_d2(n, 0.0);
  std::vector<bool> is_center(n, false);
  is_center[first] = true;
  while (centroids.size() < k) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centroids) best = std::min(best, sq_dist(matrix[i], c));
      nearest_d2[i] = is_center[i] ? 0.0 : best;
    }
    std::size_t pick = weighted_pick(nearest_d2, uniform01(rng));
    if (nearest_d2[pick] <= 0.0) {
      // Duplicate-heavy data: all remaining mass at distance zero. Take the
      // first point not already chosen so seeding still terminates.
      pick = 0;
      while (pick < n && is_center[pick]) ++pick;
      if (pick == n) pick = 0;
    }
    is_center[pick] = true;
    centroids.push_back(matrix[pick]);
  }

  ClusterReport report;
  report.k = opts.k;
  report.labels.assign(n, 0);
  report.inertia_trace.clear();

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    // Assignment; ties go to the lowest cluster index.
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_c = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const double d = sq_dist(matrix[i], centroids[c]);
        if (d < best) {
          best = d;
          best_c = static_cast<int>(c);
        }
      }
      report.labels[i] = best_c;
      inertia += best;
    }
    report.inertia = inertia;
    report.inertia_trace.push_back(inertia);

    // Update step.
    std::vector<std::vector<double>> next(k, std::vector<double>(dim, 0.0));
    std::vector<int> members(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(report.labels[i]);
      ++members[c];
      for (std::size_t col = 0; col < dim; ++col) next[c][col] += matrix[i][col];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (members[c] > 0) {
        for (double& v : next[c]) v /= members[c];
      } else {
        // Re-seed an empty cluster to the point farthest from its centroid.
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d =
              sq_dist(matrix[i], centroids[static_cast<std::size_t>(report.labels[i])]);
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        next[c] = matrix[far];
      }
    }

    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) shift = std::max(shift, sq_dist(next[c], centroids[c]));
    centroids = std::move(next);
    if (std::sqrt(shift) < opts.tol) break;
  }

  // Final assignment against the converged centroids.
  double inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_c = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const double d = sq_dist(matrix[i], centroids[c]);
      if (d < best) {
        best = d;
        best_c = static_cast<int>(c);
      }
    }
    report.labels[i] = best_c;
    inertia += best;
  }
  report.inertia = inertia;
  report.inertia_trace.push_back(inertia);
  report.centroids = std::move(centroids);
  return report;
}

}  // namespace agentlab
