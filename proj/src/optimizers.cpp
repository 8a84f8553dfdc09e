#include "bwvi/optimizers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "bwvi/diagnostics.hpp"
#include "bwvi/errors.hpp"

namespace bwvi {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kSvrgvi:
      return "svrgvi";
    case Algorithm::kSgvi:
      return "sgvi";
    case Algorithm::kBwgd:
      return "bwgd";
  }
  return "unknown";
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "svrgvi") return Algorithm::kSvrgvi;
  if (name == "sgvi") return Algorithm::kSgvi;
  if (name == "bwgd") return Algorithm::kBwgd;
  throw SpecError("unknown algorithm '" + name + "'");
}

void RunConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw SpecError("RunConfig: eta must be > 0");
  if (steps < 1) throw SpecError("RunConfig: steps must be >= 1");
  if (minibatch < 1) throw SpecError("RunConfig: minibatch must be >= 1");
  if (record_every < 1) throw SpecError("RunConfig: record_every must be >= 1");
  const bool zero = c_policy.kind() == CPolicy::Kind::kZero;
  if (algorithm == Algorithm::kSgvi && !zero) {
    throw SpecError("RunConfig: sgvi requires the zero c-policy");
  }
  if (algorithm == Algorithm::kSvrgvi && zero) {
    throw SpecError("RunConfig: svrgvi requires a non-zero c-policy (use sgvi)");
  }
  if (metrics.f_samples < 0 || metrics.variance_samples < 0) {
    throw SpecError("RunConfig: sample counts must be non-negative");
  }
  if (metrics.variance_samples > 0 && metrics.variance_samples < 100) {
    throw SpecError("RunConfig: variance_samples must be 0 or >= 100");
  }
}

Matrix backward_step(const Matrix& cov_half, double eta) {
  if (!(eta > 0.0)) throw PreconditionViolated("backward_step: eta must be > 0");
  linalg::check_symmetric(cov_half, 1e-8);
  const linalg::SymEigen eig = linalg::sym_eigen(cov_half);
  const Vector lambda = linalg::clamp_psd_eigenvalues(eig.values);
  const Vector mapped =
      0.5 * (lambda.array() + 2.0 * eta + (lambda.array() * (lambda.array() + 4.0 * eta)).sqrt());
  return linalg::symmetrize(eig.vectors * mapped.asDiagonal() * eig.vectors.transpose());
}

Gaussian fb_step(const Gaussian& g, const GradientEstimate& est, double eta) {
  if (!(eta > 0.0)) throw PreconditionViolated("fb_step: eta must be > 0");
  require_same_dim(g.dim(), est.b.size(), "fb_step");
  require_same_dim(g.dim(), est.S.rows(), "fb_step");
  const Eigen::Index d = g.dim();
  const Matrix m = Matrix::Identity(d, d) - eta * linalg::symmetrize(est.S);
  const Matrix cov_half = linalg::symmetrize(m * g.cov() * m);
  return Gaussian(g.mean() - eta * est.b, backward_step(cov_half, eta));
}

Gaussian bwgd_step(const Gaussian& g, const GradientEstimate& est, double eta) {
  if (!(eta > 0.0)) throw PreconditionViolated("bwgd_step: eta must be > 0");
  require_same_dim(g.dim(), est.b.size(), "bwgd_step");
  require_same_dim(g.dim(), est.S.rows(), "bwgd_step");
  const Eigen::Index d = g.dim();
  const Matrix m =
      Matrix::Identity(d, d) - eta * linalg::symmetrize(est.S - g.precision());
  const Matrix cov = linalg::symmetrize(m * g.cov() * m.transpose());
  return Gaussian(g.mean() - eta * est.b, cov);
}

namespace {

double variance_coefficient(const CPolicy& policy, const Target& target, const Gaussian& g,
                            long n, Rng& rng) {
  switch (policy.kind()) {
    case CPolicy::Kind::kZero:
      return 0.0;
    case CPolicy::Kind::kFixed:
      return policy.c();
    case CPolicy::Kind::kAdaptive:
      return std::clamp(c_star(target, g, n, rng), policy.lo(), policy.hi());
  }
  return 0.0;
}

bool exceeds_guard(const std::optional<double>& v) {
  return v && (!std::isfinite(*v) || std::abs(*v) > kDivergenceThreshold);
}

}  // namespace

Trace run(const RunConfig& config, const Target& target, const Gaussian& init) {
  config.validate();
  require_same_dim(target.dim(), init.dim(), "run");
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();

  const Rng root(config.seed);
  Rng step_rng = root.child(0);
  Rng metric_rng = root.child(1);
  const std::optional<Gaussian>& optimum = target.info().optimum;

  auto measure = [&](int iter, const Gaussian& g, double c_used) {
    IterRecord rec;
    rec.iter = iter;
    rec.c_used = c_used;
    if (config.metrics.kl && optimum) rec.kl = kl_gaussian(g, *optimum);
    if (config.metrics.w2 && optimum) rec.w2sq = w2_squared(g, *optimum);
    if (config.metrics.f_samples > 0) {
      rec.f = objective_f(target, g, config.metrics.f_samples, metric_rng);
    }
    if (config.metrics.variance_samples > 0) {
      const long n = config.metrics.variance_samples;
      const double c = variance_coefficient(config.c_policy, target, g, n, metric_rng);
      const VarianceReport report = variance_gap_empirical(target, g, c, n, metric_rng);
      rec.var_mc = report.var_mc;
      rec.var_vr = report.var_vr;
    }
    rec.diverged = exceeds_guard(rec.kl) || exceeds_guard(rec.f) || exceeds_guard(rec.w2sq);
    rec.wall_ns =
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
    return rec;
  };

  Trace trace;
  Gaussian current = init;
  trace.iterates.push_back(init);

  auto fail = [&](int iter, const std::string& why) {
    IterRecord rec;
    rec.iter = iter;
    rec.diverged = true;
    rec.wall_ns =
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
    trace.records.push_back(rec);
    trace.diverged = true;
    trace.failure = why;
  };

  try {
    trace.records.push_back(measure(0, current, 0.0));
  } catch (const Error& e) {
    fail(0, e.what());
    return trace;
  }

  for (int k = 0; k < config.steps; ++k) {
    const int iter = k + 1;
    double c_used = 0.0;
    try {
      if (config.algorithm == Algorithm::kBwgd) {
        const GradientEstimate est = mc_estimate(target, current, step_rng, config.minibatch);
        c_used = est.c_used;
        current = bwgd_step(current, est, config.eta);
      } else {
        const GradientEstimate est =
            vr_estimate(target, current, step_rng, config.minibatch, config.c_policy);
        c_used = est.c_used;
        current = fb_step(current, est, config.eta);
      }
    } catch (const Error& e) {
      fail(iter, e.what());
      break;
    }
    trace.steps_completed = iter;

    const bool on_cadence = iter % config.record_every == 0 || iter == config.steps;
    if (config.keep_iterates && on_cadence) trace.iterates.push_back(current);
    if (!on_cadence) continue;
    try {
      IterRecord rec = measure(iter, current, c_used);
      trace.records.push_back(rec);
      if (rec.diverged) {
        trace.diverged = true;
        trace.failure = "metric exceeded divergence threshold";
        break;
      }
    } catch (const Error& e) {
      fail(iter, e.what());
      break;
    }
  }
  if (!config.keep_iterates && trace.steps_completed > 0) trace.iterates.push_back(current);
  return trace;
}

}  // namespace bwvi
