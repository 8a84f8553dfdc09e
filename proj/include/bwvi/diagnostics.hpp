#pragma once

// Executable forms of the variance-reduction analysis: empirical and analytic
// variance gaps, the optimal coefficient, neighbourhood checks, convergence
// bound calculators, plus the F(mu) estimator and a Laplace baseline.

#include <Eigen/Dense>
#include <optional>

#include "bwvi/gaussian.hpp"
#include "bwvi/rng.hpp"
#include "bwvi/targets.hpp"

namespace bwvi {

struct VarianceReport {
  double var_mc = 0.0;  // E||grad V(X) - E grad V||^2, sample estimate
  double var_vr = 0.0;  // same for grad V(X) - c Sigma^{-1}(X - m)
  double gap_empirical = 0.0;
  // 2c Tr(E hess V) - c^2 Tr(Sigma^{-1}); only for constant-Hessian targets.
  std::optional<double> gap_analytic;
  // Tr(H Sigma H) for constant Hessian H.
  std::optional<double> var_mc_analytic;
  double c_used = 0.0;
  double c_star = 0.0;
  double tau_hat = 0.0;  // var_vr / var_mc
  long n_samples = 0;
  double standard_error = 0.0;  // of gap_empirical
};

// Both variances from one shared set of n draws (common random numbers).
VarianceReport variance_gap_empirical(const Target& t, const Gaussian& g, double c, long n,
                                      Rng& rng);

// Tr(E hess V) / Tr(Sigma^{-1}); exact for constant-Hessian targets.
double c_star(const Target& t, const Gaussian& g, long n, Rng& rng);

struct RegionCheck {
  bool inside = false;
  double lhs = 0.0;
  double radius = 0.0;
};

// 2 ell W2(g, opt) + c |Tr(Sigma^{-1}) - Tr(opt^{-1})| < (2 - c) Tr(opt^{-1})
RegionCheck vr_region_check(const Gaussian& g, const Gaussian& opt, double ell, double c);

// Tr(Sigma^{-1}) < 2 alpha d / c
bool large_variance_check(const Gaussian& g, double alpha, double c);

struct OptimalityResiduals {
  double grad_norm = 0.0;      // ||mean grad V||
  double hess_residual = 0.0;  // ||mean hess V - Sigma^{-1}||_F
};

OptimalityResiduals optimality_residuals(const Target& t, const Gaussian& g, long n, Rng& rng);

// F(g) = E_g V + H(g), only E_g V sampled; H(g) = -entropy(g).
double objective_f(const Target& t, const Gaussian& g, long n, Rng& rng);

// Variance-reduction factor tau: analytic 1 - gap / var when the report has
// the constant-Hessian closed forms, var_vr / var_mc otherwise.
double tau_estimate(const VarianceReport& report);

struct BoundInputs {
  double alpha = 0.0;
  double beta = 1.0;
  double eta = 1e-3;
  long N = 1;
  long d = 1;
  double tau_max_inf = 1.0;
  double tau_max_E = 1.0;
  double w2sq_init = 0.0;
  double lambda_max_opt = 1.0;

  void validate() const;
};

// Convex case; C = 24 beta^3 lambda_max:
//   e / (1 + C eta^2 (1 - tau_inf) / 2) * (1/(2 eta N) + C eta / 2) * W0
//   + 3 eta beta d (1 + tau_E)
double bound_convex(const BoundInputs& in);

// Strongly convex case, requires eta <= alpha^2 / (48 beta^3):
//   exp(-N (3 - tau_inf) eta alpha / 4) W0 + 24 (1 + tau_E) beta eta d / ((3 - tau_inf) alpha)
double bound_strongly_convex(const BoundInputs& in);

// Damped Newton to the mode, then N(x_map, hess V(x_map)^{-1}).
Gaussian laplace_approx(const Target& t, const Vector& x0, int max_iter = 100,
                        double tol = 1e-8);

}  // namespace bwvi
