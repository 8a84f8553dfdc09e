#include "bwvi/estimators.hpp"

#include <algorithm>
#include <string>

#include "bwvi/errors.hpp"

namespace bwvi {

CPolicy CPolicy::zero() { return CPolicy(Kind::kZero, 0.0, kDefaultLo, kDefaultHi); }

CPolicy CPolicy::fixed(double c) {
  if (!(c > 0.0 && c <= 2.0)) {
    throw SpecError("CPolicy::fixed: c must lie in (0, 2], got " + std::to_string(c));
  }
  return CPolicy(Kind::kFixed, c, kDefaultLo, kDefaultHi);
}

CPolicy CPolicy::adaptive(double lo, double hi) {
  if (!(lo > 0.0 && lo <= hi && hi <= 2.0)) {
    throw SpecError("CPolicy::adaptive: need 0 < lo <= hi <= 2");
  }
  return CPolicy(Kind::kAdaptive, 0.0, lo, hi);
}

double resolve_c(const CPolicy& policy, const Matrix& S, double precision_trace) {
  switch (policy.kind()) {
    case CPolicy::Kind::kZero:
      return 0.0;
    case CPolicy::Kind::kFixed:
      return policy.c();
    case CPolicy::Kind::kAdaptive: {
      if (!(precision_trace > 0.0)) {
        throw PreconditionViolated("resolve_c: Tr(Sigma^{-1}) must be positive");
      }
      const double raw = S.trace() / precision_trace;
      if (!std::isfinite(raw)) return policy.lo();
      return std::clamp(raw, policy.lo(), policy.hi());
    }
  }
  return 0.0;
}

namespace {

GradientEstimate plain_estimate(const Target& t, const Gaussian& g, Rng& rng, Eigen::Index m) {
  if (m < 1) throw PreconditionViolated("estimate: minibatch size must be >= 1");
  require_same_dim(t.dim(), g.dim(), "estimate");
  GradientEstimate est{Vector::Zero(g.dim()), Matrix::Zero(g.dim(), g.dim()), 0.0,
                       sample(g, rng, m)};
  for (Eigen::Index j = 0; j < m; ++j) {
    const Vector x = est.samples.row(j).transpose();
    est.b += t.gradient(x);
    if (!t.constant_hessian()) est.S += t.hessian(x);
  }
  const double inv_m = 1.0 / static_cast<double>(m);
  est.b *= inv_m;
  if (t.constant_hessian()) {
    est.S = t.hessian(est.samples.row(0).transpose());
  } else {
    est.S = linalg::symmetrize(est.S * inv_m);
  }
  return est;
}

}  // namespace

GradientEstimate mc_estimate(const Target& t, const Gaussian& g, Rng& rng, Eigen::Index m) {
  return plain_estimate(t, g, rng, m);
}

GradientEstimate vr_estimate(const Target& t, const Gaussian& g, Rng& rng, Eigen::Index m,
                             const CPolicy& policy) {
  GradientEstimate est = plain_estimate(t, g, rng, m);
  const double precision_trace =
      policy.kind() == CPolicy::Kind::kAdaptive ? g.precision_trace() : 1.0;
  est.c_used = resolve_c(policy, est.S, precision_trace);
  if (est.c_used == 0.0) return est;

  // mean_j Sigma^{-1}(X_j - m) = Sigma^{-1}(mean_j X_j - m)
  const Vector centred = est.samples.colwise().mean().transpose() - g.mean();
  est.b -= est.c_used * linalg::chol_solve(g.chol(), centred);
  return est;
}

}  // namespace bwvi
