#pragma once

// Target potentials V for pi(x) ∝ exp(-V(x)), with hand-coded gradients and
// Hessians.

#include <Eigen/Dense>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "bwvi/gaussian.hpp"
#include "bwvi/rng.hpp"

namespace bwvi {

struct TargetInfo {
  std::string kind;
  std::optional<double> alpha;  // strong convexity
  std::optional<double> beta;   // gradient Lipschitz constant
  std::optional<double> ell;    // smoothness of the Laplacian
  // Present when pi is itself Gaussian (then it is also the VI optimum).
  std::optional<Gaussian> optimum;
};

class Target {
 public:
  virtual ~Target() = default;

  virtual Eigen::Index dim() const = 0;
  virtual double potential(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual Matrix hessian(const Vector& x) const = 0;

  // True when the Hessian does not depend on x.
  virtual bool constant_hessian() const { return false; }
  virtual double hessian_trace(const Vector& x) const { return hessian(x).trace(); }

  const TargetInfo& info() const { return info_; }

 protected:
  TargetInfo info_;
};

using TargetPtr = std::shared_ptr<const Target>;

// V(x) = 1/2 (x - m)^T S^{-1} (x - m)
class GaussianTarget final : public Target {
 public:
  GaussianTarget(Vector mean, Matrix cov);

  Eigen::Index dim() const override { return distribution_.dim(); }
  double potential(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Matrix hessian(const Vector& x) const override;
  bool constant_hessian() const override { return true; }
  double hessian_trace(const Vector&) const override { return precision_trace_; }

  const Gaussian& distribution() const { return distribution_; }
  const Matrix& precision() const { return precision_; }

 private:
  Gaussian distribution_;
  Matrix precision_;
  double precision_trace_;
};

// Multivariate Student-t with location, scale matrix and nu degrees of freedom.
class StudentTTarget final : public Target {
 public:
  StudentTTarget(Vector loc, Matrix scale, double nu);

  Eigen::Index dim() const override { return loc_.size(); }
  double potential(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Matrix hessian(const Vector& x) const override;
  double hessian_trace(const Vector& x) const override;

  const Vector& loc() const { return loc_; }
  const Matrix& scale() const { return scale_; }
  double nu() const { return nu_; }

 private:
  Vector loc_;
  Matrix scale_;
  linalg::CholeskyFactor scale_chol_;
  Matrix scale_inv_;
  double scale_inv_trace_;
  double nu_;
};

struct LogRegData {
  Matrix x;  // n x d covariates
  Vector y;  // n labels in {0, 1}

  Eigen::Index n() const { return x.rows(); }
  Eigen::Index d() const { return x.cols(); }
  void validate() const;
};

// Flat-prior logistic regression: V(t) = sum_i [log(1 + e^{<t,x_i>}) - y_i <t,x_i>].
class LogRegTarget final : public Target {
 public:
  explicit LogRegTarget(LogRegData data);

  Eigen::Index dim() const override { return data_.d(); }
  double potential(const Vector& theta) const override;
  Vector gradient(const Vector& theta) const override;
  Matrix hessian(const Vector& theta) const override;
  double hessian_trace(const Vector& theta) const override;

  const LogRegData& data() const { return data_; }

 private:
  LogRegData data_;
  Vector row_sq_norms_;
};

std::shared_ptr<GaussianTarget> gaussian_target(Vector mean, Matrix cov);
std::shared_ptr<StudentTTarget> student_t_target(Vector loc, Matrix scale, double nu);
std::shared_ptr<LogRegTarget> logreg_target(LogRegData data);

// X_i ~ N(0, I_d), theta* ~ N(0, I_d / d), Y_i ~ Bernoulli(sigmoid(<theta*, X_i>)).
LogRegData generate_logreg_data(Eigen::Index n, Eigen::Index d, Rng& rng);

// Random SPD matrix A A^T / d + floor * I with A standard normal.
Matrix random_spd_matrix(Eigen::Index d, Rng& rng, double floor);

// Mean uniform on [-2, 2]^d, covariance random_spd_matrix(d, rng, kRandomCovFloor).
inline constexpr double kRandomCovFloor = 1.0;
std::shared_ptr<GaussianTarget> random_gaussian_target(Eigen::Index d, Rng& rng);

double sigmoid(double z);
double softplus(double z);  // log(1 + e^z), overflow-safe

// CSV with header x_1,...,x_d,y.
void write_logreg_csv(const LogRegData& data, std::ostream& out);
LogRegData read_logreg_csv(std::istream& in);

}  // namespace bwvi
