#pragma once

// Monte Carlo and control-variate estimators of E_mu[grad V] and
// E_mu[hess V] at a Gaussian mu.

#include <Eigen/Dense>

#include "bwvi/gaussian.hpp"
#include "bwvi/rng.hpp"
#include "bwvi/targets.hpp"

namespace bwvi {

// How the control-variate coefficient c is chosen at each iteration.
class CPolicy {
 public:
  enum class Kind { kZero, kFixed, kAdaptive };

  static constexpr double kDefaultLo = 0.05;
  static constexpr double kDefaultHi = 1.0;

  // Pure Monte Carlo (c = 0).
  static CPolicy zero();
  // Constant c in (0, 2].
  static CPolicy fixed(double c);
  // c = clamp(Tr(S) / Tr(Sigma^{-1}), lo, hi) with S the current Hessian estimate.
  static CPolicy adaptive(double lo = kDefaultLo, double hi = kDefaultHi);

  Kind kind() const { return kind_; }
  double c() const { return c_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  bool operator==(const CPolicy&) const = default;

 private:
  CPolicy(Kind kind, double c, double lo, double hi) : kind_(kind), c_(c), lo_(lo), hi_(hi) {}

  Kind kind_;
  double c_;
  double lo_;
  double hi_;
};

struct GradientEstimate {
  Vector b;        // estimate of E grad V
  Matrix S;        // estimate of E hess V (symmetric)
  double c_used;   // control-variate coefficient actually applied
  Matrix samples;  // m x d draws consumed
};

double resolve_c(const CPolicy& policy, const Matrix& S, double precision_trace);

// b = mean grad V(X_j), S = mean hess V(X_j), X_j ~ g i.i.d.
GradientEstimate mc_estimate(const Target& t, const Gaussian& g, Rng& rng, Eigen::Index m);

// Same draws as mc_estimate; b additionally subtracts c * Sigma^{-1}(X_j - m)
// averaged over the draws. S is left unchanged. Uses only g's cached factor.
GradientEstimate vr_estimate(const Target& t, const Gaussian& g, Rng& rng, Eigen::Index m,
                             const CPolicy& policy);

}  // namespace bwvi
