#pragma once

// Points of the Bures-Wasserstein space and their closed-form geometry.

#include <Eigen/Dense>

#include "bwvi/linalg.hpp"
#include "bwvi/rng.hpp"

namespace bwvi {

using linalg::Matrix;
using linalg::Vector;

// N(mean, cov) with the Cholesky factor of cov computed once at construction.
// Every Sigma^{-1} v downstream goes through this cached factor.
class Gaussian {
 public:
  // Smallest admissible Cholesky pivot (variance along the worst direction).
  static constexpr double kMinPivot = 1e-12;

  Gaussian(Vector mean, Matrix cov);

  static Gaussian standard(Eigen::Index dim);

  Eigen::Index dim() const { return mean_.size(); }
  const Vector& mean() const { return mean_; }
  const Matrix& cov() const { return cov_; }
  const linalg::CholeskyFactor& chol() const { return chol_; }

  // Tr(Sigma^{-1}), O(d^3) triangular inversion, no refactorization.
  double precision_trace() const { return linalg::chol_inverse_trace(chol_); }
  Matrix precision() const { return linalg::chol_inverse(chol_); }

 private:
  Vector mean_;
  Matrix cov_;
  linalg::CholeskyFactor chol_;
};

// n x d matrix; row j is m + L z_j.
Matrix sample(const Gaussian& g, Rng& rng, Eigen::Index n);

double bures_squared(const Matrix& cov0, const Matrix& cov1);
double w2_squared(const Gaussian& p0, const Gaussian& p1);

// KL(p0 || p1)
double kl_gaussian(const Gaussian& p0, const Gaussian& p1);

// Differential entropy; the negative entropy functional is -entropy(g).
double entropy(const Gaussian& g);

// Linear part A of the optimal transport map T(x) = m1 + A (x - m0).
Matrix ot_map_linear(const Gaussian& p0, const Gaussian& p1);
Vector ot_map(const Gaussian& p0, const Gaussian& p1, const Vector& x);

// Sigma^{-1}(x - m), the control variate used by the variance-reduced estimator.
Vector stein_score(const Gaussian& g, const Vector& x);

}  // namespace bwvi
