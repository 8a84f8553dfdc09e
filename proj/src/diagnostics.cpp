#include "bwvi/diagnostics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "bwvi/errors.hpp"

namespace bwvi {

namespace {

void require_samples(long n, long min, const char* what) {
  if (n < min) {
    throw PreconditionViolated(std::string(what) + ": need n >= " + std::to_string(min));
  }
}

}  // namespace

VarianceReport variance_gap_empirical(const Target& t, const Gaussian& g, double c, long n,
                                      Rng& rng) {
  require_samples(n, 100, "variance_gap_empirical");
  require_same_dim(t.dim(), g.dim(), "variance_gap_empirical");
  const Matrix x = sample(g, rng, n);
  const Eigen::Index d = g.dim();

  Matrix grads(n, d);
  double hess_trace_sum = 0.0;
  for (long j = 0; j < n; ++j) {
    const Vector xj = x.row(j).transpose();
    grads.row(j) = t.gradient(xj).transpose();
    if (!t.constant_hessian()) hess_trace_sum += t.hessian_trace(xj);
  }
  Matrix centred_x = x.rowwise() - g.mean().transpose();
  // Row j of scores is Sigma^{-1}(X_j - m)
  const Matrix scores = linalg::chol_solve(g.chol(), Matrix(centred_x.transpose())).transpose();
  const Matrix vr = grads - c * scores;

  const Eigen::RowVectorXd mean_mc = grads.colwise().mean();
  const Eigen::RowVectorXd mean_vr = vr.colwise().mean();
  const Eigen::VectorXd dev_mc = (grads.rowwise() - mean_mc).rowwise().squaredNorm();
  const Eigen::VectorXd dev_vr = (vr.rowwise() - mean_vr).rowwise().squaredNorm();
  const double bessel = static_cast<double>(n) / static_cast<double>(n - 1);

  VarianceReport r;
  r.n_samples = n;
  r.c_used = c;
  r.var_mc = dev_mc.mean() * bessel;
  r.var_vr = dev_vr.mean() * bessel;
  r.gap_empirical = r.var_mc - r.var_vr;
  const Eigen::VectorXd diff = (dev_mc - dev_vr) * bessel;
  const double diff_var = (diff.array() - diff.mean()).square().sum() / static_cast<double>(n - 1);
  r.standard_error = std::sqrt(diff_var / static_cast<double>(n));
  r.tau_hat = r.var_mc > 0.0 ? r.var_vr / r.var_mc : 0.0;

  const double prec_trace = g.precision_trace();
  if (t.constant_hessian()) {
    const Matrix h = t.hessian(g.mean());
    const double h_trace = h.trace();
    r.c_star = h_trace / prec_trace;
    r.gap_analytic = 2.0 * c * h_trace - c * c * prec_trace;
    r.var_mc_analytic = (h * g.cov() * h).trace();
  } else {
    r.c_star = (hess_trace_sum / static_cast<double>(n)) / prec_trace;
  }
  return r;
}

double c_star(const Target& t, const Gaussian& g, long n, Rng& rng) {
  require_samples(n, 1, "c_star");
  require_same_dim(t.dim(), g.dim(), "c_star");
  const double prec_trace = g.precision_trace();
  if (t.constant_hessian()) return t.hessian_trace(g.mean()) / prec_trace;
  const Matrix x = sample(g, rng, n);
  double sum = 0.0;
  for (long j = 0; j < n; ++j) sum += t.hessian_trace(x.row(j).transpose());
  return (sum / static_cast<double>(n)) / prec_trace;
}

RegionCheck vr_region_check(const Gaussian& g, const Gaussian& opt, double ell, double c) {
  require_same_dim(g.dim(), opt.dim(), "vr_region_check");
  if (!(c > 0.0 && c < 2.0)) throw PreconditionViolated("vr_region_check: c in (0, 2)");
  if (!(ell >= 0.0)) throw PreconditionViolated("vr_region_check: ell >= 0");
  const double opt_trace = opt.precision_trace();
  RegionCheck out;
  out.radius = (2.0 - c) * opt_trace;
  const double w2 = ell > 0.0 ? std::sqrt(w2_squared(g, opt)) : 0.0;
  out.lhs = 2.0 * ell * w2 + c * std::abs(g.precision_trace() - opt_trace);
  out.inside = out.lhs < out.radius;
  return out;
}

bool large_variance_check(const Gaussian& g, double alpha, double c) {
  if (!(alpha > 0.0) || !(c > 0.0)) {
    throw PreconditionViolated("large_variance_check: alpha and c must be positive");
  }
  return g.precision_trace() < 2.0 * alpha * static_cast<double>(g.dim()) / c;
}

OptimalityResiduals optimality_residuals(const Target& t, const Gaussian& g, long n, Rng& rng) {
  require_samples(n, 100, "optimality_residuals");
  require_same_dim(t.dim(), g.dim(), "optimality_residuals");
  const Matrix x = sample(g, rng, n);
  Vector grad = Vector::Zero(g.dim());
  Matrix hess = Matrix::Zero(g.dim(), g.dim());
  for (long j = 0; j < n; ++j) {
    const Vector xj = x.row(j).transpose();
    grad += t.gradient(xj);
    if (!t.constant_hessian()) hess += t.hessian(xj);
  }
  grad /= static_cast<double>(n);
  if (t.constant_hessian()) {
    hess = t.hessian(g.mean());
  } else {
    hess /= static_cast<double>(n);
  }
  return {grad.norm(), (hess - g.precision()).norm()};
}

double objective_f(const Target& t, const Gaussian& g, long n, Rng& rng) {
  require_samples(n, 1, "objective_f");
  require_same_dim(t.dim(), g.dim(), "objective_f");
  const Matrix x = sample(g, rng, n);
  double potential = 0.0;
  for (long j = 0; j < n; ++j) potential += t.potential(x.row(j).transpose());
  return potential / static_cast<double>(n) - entropy(g);
}

double tau_estimate(const VarianceReport& report) {
  if (!(report.var_mc > 0.0)) {
    throw DegenerateVariance("tau_estimate: Monte Carlo variance is not positive");
  }
  if (report.gap_analytic) {
    const double denom = report.var_mc_analytic.value_or(report.var_mc);
    if (!(denom > 0.0)) throw DegenerateVariance("tau_estimate: analytic variance is zero");
    return 1.0 - *report.gap_analytic / denom;
  }
  return report.var_vr / report.var_mc;
}

void BoundInputs::validate() const {
  const bool finite = std::isfinite(alpha) && std::isfinite(beta) && std::isfinite(eta) &&
                      std::isfinite(tau_max_inf) && std::isfinite(tau_max_E) &&
                      std::isfinite(w2sq_init) && std::isfinite(lambda_max_opt);
  if (!finite) throw PreconditionViolated("BoundInputs: non-finite value");
  if (alpha < 0.0 || !(beta > 0.0) || !(eta > 0.0) || N < 0 || d < 1 ||
      tau_max_inf < 0.0 || tau_max_inf > 1.0 || tau_max_E < 0.0 || tau_max_E > 1.0 ||
      w2sq_init < 0.0 || !(lambda_max_opt > 0.0)) {
    throw PreconditionViolated("BoundInputs: value out of range");
  }
}

double bound_convex(const BoundInputs& in) {
  in.validate();
  if (in.N < 1) throw PreconditionViolated("bound_convex: N must be >= 1");
  const double c = 24.0 * std::pow(in.beta, 3) * in.lambda_max_opt;
  const double eta = in.eta;
  const double n = static_cast<double>(in.N);
  const double d = static_cast<double>(in.d);
  const double lead = std::numbers::e / (1.0 + c * eta * eta * (1.0 - in.tau_max_inf) / 2.0);
  return lead * (1.0 / (2.0 * eta * n) + c * eta / 2.0) * in.w2sq_init +
         3.0 * eta * in.beta * d * (1.0 + in.tau_max_E);
}

double bound_strongly_convex(const BoundInputs& in) {
  in.validate();
  if (!(in.alpha > 0.0)) throw PreconditionViolated("bound_strongly_convex: alpha must be > 0");
  const double eta_max = in.alpha * in.alpha / (48.0 * std::pow(in.beta, 3));
  if (in.eta > eta_max) {
    throw PreconditionViolated("bound_strongly_convex: eta exceeds alpha^2 / (48 beta^3)");
  }
  const double n = static_cast<double>(in.N);
  const double d = static_cast<double>(in.d);
  const double rate = 3.0 - in.tau_max_inf;
  return std::exp(-n * rate * in.eta * in.alpha / 4.0) * in.w2sq_init +
         24.0 * (1.0 + in.tau_max_E) * in.beta * in.eta * d / (rate * in.alpha);
}

Gaussian laplace_approx(const Target& t, const Vector& x0, int max_iter, double tol) {
  require_same_dim(t.dim(), x0.size(), "laplace_approx");
  constexpr int kMaxHalvings = 60;
  Vector x = x0;
  double value = t.potential(x);
  bool converged = false;
  for (int it = 0; it <= max_iter; ++it) {
    const Vector grad = t.gradient(x);
    if (!grad.allFinite()) throw NoConvergence("laplace_approx: non-finite gradient");
    if (grad.norm() < tol) {
      converged = true;
      break;
    }
    if (it == max_iter) break;
    Vector direction;
    try {
      direction = -linalg::chol_solve(linalg::cholesky(t.hessian(x)), grad);
    } catch (const NotPositiveDefinite&) {
      direction = -grad;  // indefinite curvature away from the mode
    }
    double step = 1.0;
    bool accepted = false;
    for (int h = 0; h < kMaxHalvings; ++h, step *= 0.5) {
      const Vector candidate = x + step * direction;
      const double cand_value = t.potential(candidate);
      if (std::isfinite(cand_value) && cand_value < value) {
        x = candidate;
        value = cand_value;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw NoConvergence("laplace_approx: line search failed at gradient norm " +
                          std::to_string(grad.norm()));
    }
  }
  if (!converged) {
    throw NoConvergence("laplace_approx: no convergence after " + std::to_string(max_iter) +
                        " iterations (|x| = " + std::to_string(x.norm()) + ")");
  }
  Matrix cov;
  try {
    cov = linalg::chol_inverse(linalg::cholesky(t.hessian(x)));
  } catch (const NotPositiveDefinite& e) {
    throw NonPdHessianAtMode(std::string("laplace_approx: ") + e.what());
  }
  try {
    return Gaussian(x, cov);
  } catch (const NotPositiveDefinite& e) {
    throw NonPdHessianAtMode(std::string("laplace_approx: ") + e.what());
  }
}

}  // namespace bwvi
