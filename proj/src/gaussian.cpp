#include "bwvi/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bwvi/errors.hpp"

namespace bwvi {

namespace {

linalg::CholeskyFactor checked_factor(const Vector& mean, const Matrix& cov) {
  require_same_dim(mean.size(), cov.rows(), "Gaussian");
  if (mean.size() == 0) throw DimensionMismatch("Gaussian: zero dimension");
  if (!mean.allFinite()) throw NotPositiveDefinite("Gaussian: non-finite mean");
  linalg::CholeskyFactor chol = linalg::cholesky(cov);
  const double min_pivot = chol.lower().diagonal().array().square().minCoeff();
  if (!(min_pivot > Gaussian::kMinPivot)) {
    throw NotPositiveDefinite("Gaussian: covariance is numerically degenerate (pivot " +
                              std::to_string(min_pivot) + ")");
  }
  return chol;
}

}  // namespace

Gaussian::Gaussian(Vector mean, Matrix cov)
    : mean_(std::move(mean)),
      cov_(linalg::symmetrize(cov)),
      chol_(checked_factor(mean_, cov)) {}

Gaussian Gaussian::standard(Eigen::Index dim) {
  return Gaussian(Vector::Zero(dim), Matrix::Identity(dim, dim));
}

Matrix sample(const Gaussian& g, Rng& rng, Eigen::Index n) {
  if (n < 1) throw PreconditionViolated("sample: n must be >= 1");
  const Matrix z = rng.normal_matrix(n, g.dim());
  Matrix x = z * g.chol().lower().transpose();
  x.rowwise() += g.mean().transpose();
  return x;
}

double bures_squared(const Matrix& cov0, const Matrix& cov1) {
  require_same_dim(cov0.rows(), cov1.rows(), "bures_squared");
  const Matrix root0 = linalg::spd_sqrt(cov0);
  const Matrix cross = linalg::symmetrize(root0 * cov1 * root0);
  const linalg::Vector eig = linalg::clamp_psd_eigenvalues(linalg::sym_eigen(cross).values);
  const double value = cov0.trace() + cov1.trace() - 2.0 * eig.array().sqrt().sum();
  return std::max(0.0, value);
}

double w2_squared(const Gaussian& p0, const Gaussian& p1) {
  require_same_dim(p0.dim(), p1.dim(), "w2_squared");
  return (p0.mean() - p1.mean()).squaredNorm() + bures_squared(p0.cov(), p1.cov());
}

double kl_gaussian(const Gaussian& p0, const Gaussian& p1) {
  require_same_dim(p0.dim(), p1.dim(), "kl_gaussian");
  const auto l1 = p1.chol().lower().triangularView<Eigen::Lower>();
  // Tr(S1^{-1} S0) = ||L1^{-1} L0||_F^2
  const Matrix whitened = l1.solve(p0.chol().lower());
  const Vector diff = l1.solve(Vector(p1.mean() - p0.mean()));
  const double d = static_cast<double>(p0.dim());
  const double kl = 0.5 * (whitened.squaredNorm() + diff.squaredNorm() - d +
                           linalg::logdet(p1.chol()) - linalg::logdet(p0.chol()));
  return std::max(0.0, kl);
}

double entropy(const Gaussian& g) {
  const double d = static_cast<double>(g.dim());
  return 0.5 * (d * std::log(2.0 * std::numbers::pi) + d + linalg::logdet(g.chol()));
}

Matrix ot_map_linear(const Gaussian& p0, const Gaussian& p1) {
  require_same_dim(p0.dim(), p1.dim(), "ot_map");
  const linalg::SymEigen eig0 = linalg::sym_eigen(p0.cov());
  const Vector roots = eig0.values.array().sqrt();
  const Matrix root0 = eig0.vectors * roots.asDiagonal() * eig0.vectors.transpose();
  const Matrix inv_root0 =
      eig0.vectors * roots.cwiseInverse().asDiagonal() * eig0.vectors.transpose();
  const Matrix middle = linalg::spd_sqrt(linalg::symmetrize(root0 * p1.cov() * root0));
  return linalg::symmetrize(inv_root0 * middle * inv_root0);
}

Vector ot_map(const Gaussian& p0, const Gaussian& p1, const Vector& x) {
  require_same_dim(p0.dim(), x.size(), "ot_map");
  return p1.mean() + ot_map_linear(p0, p1) * (x - p0.mean());
}

Vector stein_score(const Gaussian& g, const Vector& x) {
  require_same_dim(g.dim(), x.size(), "stein_score");
  return linalg::chol_solve(g.chol(), Vector(x - g.mean()));
}

}  // namespace bwvi
