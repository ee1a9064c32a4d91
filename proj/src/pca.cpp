#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "agentlab/analytics.hpp"
#include "agentlab/errors.hpp"

namespace agentlab {

namespace {

Eigen::MatrixXd to_eigen(const std::vector<std::vector<double>>& matrix) {
  const auto n = static_cast<Eigen::Index>(matrix.size());
  const auto d = static_cast<Eigen::Index>(matrix.empty() ? 0 : matrix.front().size());
  Eigen::MatrixXd X(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = matrix[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != d)
      throw ConfigError("ragged matrix rows");
    for (Eigen::Index j = 0; j < d; ++j) X(i, j) = row[static_cast<std::size_t>(j)];
  }
  return X;
}

}  // namespace

PcaResult pca(const std::vector<std::vector<double>>& matrix, int k) {
  const Eigen::MatrixXd X = to_eigen(matrix);
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  if (n < 1 || d < 1) throw ConfigError("pca needs a non-empty matrix");
  if (k < 1 || k > std::min(n, d))
    throw ConfigError("pca component count must be in 1..min(n_docs, dim)");

  PcaResult out;
  const Eigen::RowVectorXd mean = X.colwise().mean();
  out.mean.assign(mean.data(), mean.data() + d);
  const Eigen::MatrixXd Xc = X.rowwise() - mean;

  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  const double total_var = Xc.squaredNorm() / denom;

  // Eigenvalues arrive ascending from the solver; we consume them from the
  // back. The Gram-matrix route avoids a dim x dim solve when dim > n.
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd components(k, d);  // rows = principal axes
  if (d <= n) {
    const Eigen::MatrixXd C = (Xc.transpose() * Xc) / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(C);
    if (solver.info() != Eigen::Success) throw Error("pca eigensolver failed");
    eigenvalues = solver.eigenvalues();
    for (int c = 0; c < k; ++c)
      components.row(c) = solver.eigenvectors().col(d - 1 - c).transpose();
  } else {
    const Eigen::MatrixXd G = (Xc * Xc.transpose()) / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(G);
    if (solver.info() != Eigen::Success) throw Error("pca eigensolver failed");
    eigenvalues = solver.eigenvalues();
    for (int c = 0; c < k; ++c) {
      const double lambda = eigenvalues(n - 1 - c);
      if (lambda > 1e-12) {
        const Eigen::VectorXd u = solver.eigenvectors().col(n - 1 - c);
        components.row(c) = (Xc.transpose() * u).transpose() / std::sqrt(denom * lambda);
      } else {
        components.row(c).setZero();  // zero-variance direction, unrecoverable
        out.rank_deficient = true;
      }
    }
  }

  const Eigen::Index spectrum = eigenvalues.size();
  out.explained_variance_ratio.resize(static_cast<std::size_t>(k), 0.0);
  for (int c = 0; c < k; ++c) {
    const double lambda = std::max(0.0, eigenvalues(spectrum - 1 - c));
    if (lambda <= 1e-12) out.rank_deficient = true;
    out.explained_variance_ratio[static_cast<std::size_t>(c)] =
        total_var > 0.0 ? lambda / total_var : 0.0;
  }
  if (total_var <= 0.0) out.rank_deficient = true;

  // Fix a reproducible sign: largest-magnitude coordinate of each axis >= 0.
  for (int c = 0; c < k; ++c) {
    Eigen::Index arg = 0;
    components.row(c).cwiseAbs().maxCoeff(&arg);
    if (components(c, arg) < 0.0) components.row(c) = -components.row(c);
  }

  const Eigen::MatrixXd projected = Xc * components.transpose();
  out.projected.assign(static_cast<std::size_t>(n),
                       std::vector<double>(static_cast<std::size_t>(k), 0.0));
  for (Eigen::Index i = 0; i < n; ++i)
    for (int c = 0; c < k; ++c)
      out.projected[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] =
          projected(i, c);
  out.components.assign(static_cast<std::size_t>(k),
                        std::vector<double>(static_cast<std::size_t>(d), 0.0));
  for (int c = 0; c < k; ++c)
    for (Eigen::Index j = 0; j < d; ++j)
      out.components[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] =
          components(c, j);
  return out;
}

PcaResult pca(const VectorSet& vectors, int k) { return pca(vectors.matrix, k); }

}  // namespace agentlab
