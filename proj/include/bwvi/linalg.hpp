#pragma once

// Dense symmetric / SPD primitives. Everything here is a pure function of its
// inputs; matrices are Eigen column-major but treated as symmetric values.

#include <Eigen/Dense>
#include <cstdint>

namespace bwvi::linalg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kSymmetryTol = 1e-10;
inline constexpr double kPivotRelTol = 1e-12;
inline constexpr double kEigenClampTol = 1e-10;

// Lower-triangular L with L L^T = A and a strictly positive diagonal.
class CholeskyFactor {
 public:
  // Wraps an already computed factor; validates shape and diagonal.
  explicit CholeskyFactor(Matrix lower);

  const Matrix& lower() const { return lower_; }
  Eigen::Index dim() const { return lower_.rows(); }
  Matrix reconstruct() const { return lower_ * lower_.transpose(); }

 private:
  Matrix lower_;
};

struct SymEigen {
  Vector values;   // ascending
  Matrix vectors;  // orthogonal, columns are eigenvectors
};

// (A + A^T) / 2
Matrix symmetrize(const Matrix& a);

// Throws DimensionMismatch for non-square input, or
// NotPositiveDefinite("not symmetric") when asymmetry exceeds the tolerance
// relative to max(1, max|a_ij|).
void check_symmetric(const Matrix& a, double tol = kSymmetryTol);

// Throws NotPositiveDefinite when a pivot falls to 1e-12 * max diagonal or below.
CholeskyFactor cholesky(const Matrix& a);

// A^{-1} v via two triangular solves, O(d^2).
Vector chol_solve(const CholeskyFactor& l, const Vector& v);
Matrix chol_solve(const CholeskyFactor& l, const Matrix& rhs);

// A^{-1} and Tr(A^{-1}) from the factor (no refactorization).
Matrix chol_inverse(const CholeskyFactor& l);
double chol_inverse_trace(const CholeskyFactor& l);

double logdet(const CholeskyFactor& l);

// Eigenvalues ascending. ConvergenceFailure if the QR iteration does not settle.
SymEigen sym_eigen(const Matrix& a);

// Symmetric PSD square root via eigendecomposition. Eigenvalues in
// [-1e-10 * max|lambda|, 0) are clamped to zero; anything lower throws
// NotPositiveSemiDefinite.
Matrix spd_sqrt(const Matrix& a);

// Inverse square root of a PD matrix.
Matrix spd_inv_sqrt(const Matrix& a);

// Clamp tiny negative eigenvalues of a PSD-context matrix. Throws when an
// eigenvalue is below -1e-10 * max|lambda|.
Vector clamp_psd_eigenvalues(const Vector& values);

// Number of cholesky() calls made on the calling thread.
std::uint64_t factorization_count();

}  // namespace bwvi::linalg
