#include "bwvi/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bwvi/errors.hpp"

namespace bwvi::linalg {

namespace {

thread_local std::uint64_t g_factorizations = 0;

void require_square(const Matrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw DimensionMismatch(std::string(what) + ": matrix is " + std::to_string(a.rows()) +
                            "x" + std::to_string(a.cols()));
  }
  if (a.rows() == 0) throw DimensionMismatch(std::string(what) + ": empty matrix");
}

}  // namespace

CholeskyFactor::CholeskyFactor(Matrix lower) : lower_(std::move(lower)) {
  require_square(lower_, "CholeskyFactor");
  for (Eigen::Index i = 0; i < lower_.rows(); ++i) {
    if (!(lower_(i, i) > 0.0)) {
      throw NotPositiveDefinite("CholeskyFactor: non-positive diagonal entry");
    }
  }
  lower_.triangularView<Eigen::StrictlyUpper>().setZero();
}

Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

void check_symmetric(const Matrix& a, double tol) {
  require_square(a, "check_symmetric");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= tol * scale)) {
    throw NotPositiveDefinite("matrix is not symmetric (max asymmetry " + std::to_string(asym) +
                              ")");
  }
}

CholeskyFactor cholesky(const Matrix& a) {
  check_symmetric(a);
  ++g_factorizations;
  const double max_diag = a.diagonal().maxCoeff();
  if (!(max_diag > 0.0) || !a.allFinite()) {
    throw NotPositiveDefinite("cholesky: non-positive or non-finite diagonal");
  }
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("cholesky: matrix is not positive definite");
  }
  Matrix lower = llt.matrixL();
  const double floor = kPivotRelTol * max_diag;
  for (Eigen::Index i = 0; i < lower.rows(); ++i) {
    const double pivot = lower(i, i) * lower(i, i);
    if (!(pivot > floor)) {
      throw NotPositiveDefinite("cholesky: pivot " + std::to_string(pivot) + " at index " +
                                std::to_string(i) + " is numerically degenerate");
    }
  }
  return CholeskyFactor(std::move(lower));
}

Vector chol_solve(const CholeskyFactor& l, const Vector& v) {
  require_same_dim(l.dim(), v.size(), "chol_solve");
  const auto lower = l.lower().triangularView<Eigen::Lower>();
  Vector y = lower.solve(v);
  lower.transpose().solveInPlace(y);
  return y;
}

Matrix chol_solve(const CholeskyFactor& l, const Matrix& rhs) {
  require_same_dim(l.dim(), rhs.rows(), "chol_solve");
  const auto lower = l.lower().triangularView<Eigen::Lower>();
  Matrix y = lower.solve(rhs);
  lower.transpose().solveInPlace(y);
  return y;
}

Matrix chol_inverse(const CholeskyFactor& l) {
  Matrix inv = chol_solve(l, Matrix(Matrix::Identity(l.dim(), l.dim())));
  return symmetrize(inv);
}

double chol_inverse_trace(const CholeskyFactor& l) {
  // Tr(A^{-1}) = ||L^{-1}||_F^2
  Matrix linv = Matrix::Identity(l.dim(), l.dim());
  l.lower().triangularView<Eigen::Lower>().solveInPlace(linv);
  return linv.squaredNorm();
}

double logdet(const CholeskyFactor& l) {
  return 2.0 * l.lower().diagonal().array().log().sum();
}

SymEigen sym_eigen(const Matrix& a) {
  require_square(a, "sym_eigen");
  if (!a.allFinite()) throw ConvergenceFailure("sym_eigen: non-finite input");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(a), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("sym_eigen: eigenvalue iteration did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Vector clamp_psd_eigenvalues(const Vector& values) {
  const double scale = values.cwiseAbs().maxCoeff();
  Vector out = values;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (out(i) < 0.0) {
      if (out(i) < -kEigenClampTol * scale) {
        throw NotPositiveSemiDefinite("eigenvalue " + std::to_string(out(i)) +
                                      " below the PSD clamp threshold");
      }
      out(i) = 0.0;
    }
  }
  return out;
}

Matrix spd_sqrt(const Matrix& a) {
  const SymEigen eig = sym_eigen(a);
  const Vector roots = clamp_psd_eigenvalues(eig.values).array().sqrt();
  return symmetrize(eig.vectors * roots.asDiagonal() * eig.vectors.transpose());
}

Matrix spd_inv_sqrt(const Matrix& a) {
  const SymEigen eig = sym_eigen(a);
  if (!(eig.values(0) > 0.0)) {
    throw NotPositiveDefinite("spd_inv_sqrt: matrix is singular");
  }
  const Vector inv_roots = eig.values.array().rsqrt();
  return symmetrize(eig.vectors * inv_roots.asDiagonal() * eig.vectors.transpose());
}

std::uint64_t factorization_count() { return g_factorizations; }

}  // namespace bwvi::linalg
