#include "bwvi/targets.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bwvi/errors.hpp"

namespace bwvi {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

// ---------------------------------------------------------------- Gaussian

GaussianTarget::GaussianTarget(Vector mean, Matrix cov)
    : distribution_(std::move(mean), std::move(cov)),
      precision_(distribution_.precision()),
      precision_trace_(precision_.trace()) {
  const Vector eig = linalg::sym_eigen(precision_).values;
  info_.kind = "gaussian";
  info_.alpha = eig(0);
  info_.beta = eig(eig.size() - 1);
  info_.ell = 0.0;
  info_.optimum = distribution_;
}

double GaussianTarget::potential(const Vector& x) const {
  require_same_dim(dim(), x.size(), "GaussianTarget::potential");
  const Vector w = distribution_.chol().lower().triangularView<Eigen::Lower>().solve(
      Vector(x - distribution_.mean()));
  return 0.5 * w.squaredNorm();
}

Vector GaussianTarget::gradient(const Vector& x) const {
  require_same_dim(dim(), x.size(), "GaussianTarget::gradient");
  return precision_ * (x - distribution_.mean());
}

Matrix GaussianTarget::hessian(const Vector& x) const {
  require_same_dim(dim(), x.size(), "GaussianTarget::hessian");
  return precision_;
}

// ---------------------------------------------------------------- Student-t

StudentTTarget::StudentTTarget(Vector loc, Matrix scale, double nu)
    : loc_(std::move(loc)),
      scale_(linalg::symmetrize(scale)),
      scale_chol_(linalg::cholesky(scale)),
      scale_inv_(linalg::chol_inverse(scale_chol_)),
      scale_inv_trace_(scale_inv_.trace()),
      nu_(nu) {
  require_same_dim(loc_.size(), scale_.rows(), "student_t_target");
  if (!(nu > 0.0)) throw PreconditionViolated("student_t_target: nu must be positive");
  info_.kind = "student";
}

double StudentTTarget::potential(const Vector& x) const {
  require_same_dim(dim(), x.size(), "StudentTTarget::potential");
  const Vector r = x - loc_;
  const double q = r.dot(scale_inv_ * r);
  const double d = static_cast<double>(dim());
  return 0.5 * (nu_ + d) * std::log1p(q / nu_);
}

Vector StudentTTarget::gradient(const Vector& x) const {
  require_same_dim(dim(), x.size(), "StudentTTarget::gradient");
  const Vector u = scale_inv_ * (x - loc_);
  const double q = (x - loc_).dot(u);
  const double d = static_cast<double>(dim());
  return ((nu_ + d) / (nu_ + q)) * u;
}

Matrix StudentTTarget::hessian(const Vector& x) const {
  require_same_dim(dim(), x.size(), "StudentTTarget::hessian");
  const Vector u = scale_inv_ * (x - loc_);
  const double q = (x - loc_).dot(u);
  const double d = static_cast<double>(dim());
  const double a = (nu_ + d) / (nu_ + q);
  Matrix h = a * scale_inv_;
  h.noalias() -= (2.0 * a / (nu_ + q)) * (u * u.transpose());
  return linalg::symmetrize(h);
}

double StudentTTarget::hessian_trace(const Vector& x) const {
  require_same_dim(dim(), x.size(), "StudentTTarget::hessian_trace");
  const Vector u = scale_inv_ * (x - loc_);
  const double q = (x - loc_).dot(u);
  const double d = static_cast<double>(dim());
  const double a = (nu_ + d) / (nu_ + q);
  return a * scale_inv_trace_ - (2.0 * a / (nu_ + q)) * u.squaredNorm();
}

// ---------------------------------------------------------------- logistic

void LogRegData::validate() const {
  if (x.rows() < 1 || x.cols() < 1) throw SpecError("LogRegData: n and d must be >= 1");
  require_same_dim(x.rows(), y.size(), "LogRegData");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) != 0.0 && y(i) != 1.0) throw SpecError("LogRegData: labels must be 0 or 1");
  }
  if (!x.allFinite()) throw SpecError("LogRegData: non-finite covariate");
}

LogRegTarget::LogRegTarget(LogRegData data) : data_(std::move(data)) {
  data_.validate();
  row_sq_norms_ = data_.x.rowwise().squaredNorm();
  info_.kind = "logreg";
  info_.alpha = 0.0;
  const Matrix gram = linalg::symmetrize(data_.x.transpose() * data_.x);
  const Vector eig = linalg::sym_eigen(gram).values;
  info_.beta = 0.25 * eig(eig.size() - 1);
}

double LogRegTarget::potential(const Vector& theta) const {
  require_same_dim(dim(), theta.size(), "LogRegTarget::potential");
  const Vector z = data_.x * theta;
  double v = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) v += softplus(z(i)) - data_.y(i) * z(i);
  return v;
}

Vector LogRegTarget::gradient(const Vector& theta) const {
  require_same_dim(dim(), theta.size(), "LogRegTarget::gradient");
  const Vector z = data_.x * theta;
  Vector resid(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) resid(i) = sigmoid(z(i)) - data_.y(i);
  return data_.x.transpose() * resid;
}

Matrix LogRegTarget::hessian(const Vector& theta) const {
  require_same_dim(dim(), theta.size(), "LogRegTarget::hessian");
  const Vector z = data_.x * theta;
  Vector w(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double s = sigmoid(z(i));
    w(i) = s * (1.0 - s);
  }
  const Matrix weighted = w.cwiseSqrt().asDiagonal() * data_.x;
  Matrix h = Matrix::Zero(dim(), dim());
  h.selfadjointView<Eigen::Lower>().rankUpdate(weighted.transpose());
  return h.selfadjointView<Eigen::Lower>();
}

double LogRegTarget::hessian_trace(const Vector& theta) const {
  require_same_dim(dim(), theta.size(), "LogRegTarget::hessian_trace");
  const Vector z = data_.x * theta;
  double tr = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double s = sigmoid(z(i));
    tr += s * (1.0 - s) * row_sq_norms_(i);
  }
  return tr;
}

// ---------------------------------------------------------------- factories

std::shared_ptr<GaussianTarget> gaussian_target(Vector mean, Matrix cov) {
  return std::make_shared<GaussianTarget>(std::move(mean), std::move(cov));
}

std::shared_ptr<StudentTTarget> student_t_target(Vector loc, Matrix scale, double nu) {
  return std::make_shared<StudentTTarget>(std::move(loc), std::move(scale), nu);
}

std::shared_ptr<LogRegTarget> logreg_target(LogRegData data) {
  return std::make_shared<LogRegTarget>(std::move(data));
}

LogRegData generate_logreg_data(Eigen::Index n, Eigen::Index d, Rng& rng) {
  if (n < 1 || d < 1) throw PreconditionViolated("generate_logreg_data: n, d must be >= 1");
  const Vector theta = rng.normal_vector(d) / std::sqrt(static_cast<double>(d));
  LogRegData data{rng.normal_matrix(n, d), Vector(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    data.y(i) = rng.bernoulli(sigmoid(data.x.row(i).dot(theta))) ? 1.0 : 0.0;
  }
  return data;
}

Matrix random_spd_matrix(Eigen::Index d, Rng& rng, double floor) {
  const Matrix a = rng.normal_matrix(d, d);
  Matrix s = a * a.transpose() / static_cast<double>(d);
  s.diagonal().array() += floor;
  return linalg::symmetrize(s);
}

std::shared_ptr<GaussianTarget> random_gaussian_target(Eigen::Index d, Rng& rng) {
  if (d < 1) throw PreconditionViolated("random_gaussian_target: d must be >= 1");
  Vector mean(d);
  for (Eigen::Index i = 0; i < d; ++i) mean(i) = rng.uniform(-2.0, 2.0);
  return gaussian_target(std::move(mean), random_spd_matrix(d, rng, kRandomCovFloor));
}

// ---------------------------------------------------------------- CSV

void write_logreg_csv(const LogRegData& data, std::ostream& out) {
  for (Eigen::Index j = 0; j < data.d(); ++j) out << "x_" << (j + 1) << ',';
  out << "y\n";
  char buf[32];
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index j = 0; j < data.d(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", data.x(i, j));
      out << buf << ',';
    }
    out << static_cast<int>(data.y(i)) << '\n';
  }
}

LogRegData read_logreg_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SpecError("logreg csv: missing header");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header.back() != "y") {
    throw SpecError("logreg csv: header must be x_1,...,x_d,y");
  }
  const auto d = static_cast<Eigen::Index>(header.size() - 1);
  for (Eigen::Index j = 0; j < d; ++j) {
    if (header[j] != "x_" + std::to_string(j + 1)) {
      throw SpecError("logreg csv: unexpected column '" + header[j] + "'");
    }
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw SpecError("logreg csv: bad number '" + cell + "'");
      }
    }
    if (static_cast<Eigen::Index>(row.size()) != d + 1) {
      throw SpecError("logreg csv: row has " + std::to_string(row.size()) + " cells");
    }
    rows.push_back(std::move(row));
  }
  LogRegData data{Matrix(static_cast<Eigen::Index>(rows.size()), d),
                  Vector(static_cast<Eigen::Index>(rows.size()))};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < d; ++j) data.x(r, j) = rows[i][static_cast<std::size_t>(j)];
    data.y(r) = rows[i].back();
  }
  data.validate();
  return data;
}

}  // namespace bwvi
