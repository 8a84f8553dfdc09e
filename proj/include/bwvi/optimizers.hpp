#pragma once

// Forward-backward (SVRGVI, SGVI) and forward-Euler (BWGD) schemes on the
// Bures-Wasserstein space.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bwvi/estimators.hpp"
#include "bwvi/gaussian.hpp"
#include "bwvi/targets.hpp"

namespace bwvi {

enum class Algorithm { kSvrgvi, kSgvi, kBwgd };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& name);

// Which per-iteration metrics run() computes. KL is computed whenever the
// target carries its exact optimum.
struct MetricOptions {
  bool kl = true;
  bool w2 = false;            // W2^2 to the exact optimum (Gaussian targets only)
  int f_samples = 0;          // > 0: Monte Carlo estimate of F(mu_k)
  int variance_samples = 0;   // > 0: per-iteration estimator variances
};

struct RunConfig {
  Algorithm algorithm = Algorithm::kSvrgvi;
  double eta = 1.0;
  int steps = 1;
  CPolicy c_policy = CPolicy::fixed(0.9);
  int minibatch = 1;
  std::uint64_t seed = 0;
  int record_every = 1;
  MetricOptions metrics;
  // true: one iterate per recorded row. false: only the initial and final ones.
  bool keep_iterates = true;

  void validate() const;
};

struct IterRecord {
  int iter = 0;
  std::optional<double> kl;
  std::optional<double> f;
  std::optional<double> w2sq;
  std::optional<double> var_mc;
  std::optional<double> var_vr;
  double c_used = 0.0;
  bool diverged = false;
  std::int64_t wall_ns = 0;
};

struct Trace {
  std::vector<Gaussian> iterates;
  std::vector<IterRecord> records;
  bool diverged = false;
  int steps_completed = 0;
  std::string failure;  // reason when diverged

  const Gaussian& final_iterate() const { return iterates.back(); }
};

// Divergence guard on KL / F estimates.
inline constexpr double kDivergenceThreshold = 1e12;

// Entropy proximal step: per eigenvalue lambda -> (lambda + 2 eta + sqrt(lambda (lambda + 4 eta))) / 2.
Matrix backward_step(const Matrix& cov_half, double eta);

// m' = m - eta b, Sigma' = backward_step((I - eta S) Sigma (I - eta S), eta).
Gaussian fb_step(const Gaussian& g, const GradientEstimate& est, double eta);

// m' = m - eta b, Sigma' = M Sigma M^T with M = I - eta (S - Sigma^{-1}).
// Throws NotPositiveDefinite when the update leaves the PD cone.
Gaussian bwgd_step(const Gaussian& g, const GradientEstimate& est, double eta);

// Iterates config.steps steps from init. Deterministic in config.seed. A
// failing or diverging replica returns a truncated Trace with diverged set.
Trace run(const RunConfig& config, const Target& target, const Gaussian& init);

}  // namespace bwvi
