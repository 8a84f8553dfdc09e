#include "bwvi/errors.hpp"
#include "bwvi/harness.hpp"

namespace bwvi {

namespace {

constexpr int kReplicates = 10;
constexpr int kSteps = 300;

// Step size for the logistic-regression preset. The posterior covariance has
// eigenvalues near 1e-3 and the backward step keeps every eigenvalue >= eta,
// so eta = 1 would pin the iterate far from the posterior.
constexpr double kLogRegEta = 0.005;

AlgorithmSpec line(std::string label, Algorithm algorithm, CPolicy policy, double eta = 1.0) {
  AlgorithmSpec a;
  a.label = std::move(label);
  a.algorithm = algorithm;
  a.eta = eta;
  a.steps = kSteps;
  a.c_policy = policy;
  return a;
}

std::vector<AlgorithmSpec> three_algorithms(double eta = 1.0) {
  return {line("bwgd", Algorithm::kBwgd, CPolicy::zero(), eta),
          line("sgvi", Algorithm::kSgvi, CPolicy::zero(), eta),
          line("svrgvi", Algorithm::kSvrgvi, CPolicy::fixed(0.9), eta)};
}

ExperimentSpec base(std::string name, std::string kind, long dim) {
  ExperimentSpec s;
  s.name = std::move(name);
  s.target.kind = std::move(kind);
  s.dims = {dim};
  s.seeds = default_seeds(kReplicates);
  return s;
}

}  // namespace

ExperimentSpec preset(const std::string& name) {
  if (name == "gaussian-d10" || name == "gaussian-d50" || name == "gaussian-d200") {
    const long dim = std::stol(name.substr(name.find("-d") + 2));
    ExperimentSpec s = base(name, "gaussian", dim);
    s.algorithms = three_algorithms();
    s.metrics = dim <= 50 ? std::vector<std::string>{"kl", "w2", "c_trace"}
                          : std::vector<std::string>{"kl", "c_trace"};
    return s;
  }
  if (name == "student-d200") {
    ExperimentSpec s = base(name, "student", 200);
    s.target.nu = 4.0;
    s.algorithms = three_algorithms();
    s.metrics = {"f_rel", "c_trace"};
    return s;
  }
  if (name == "logreg-d200") {
    ExperimentSpec s = base(name, "logreg", 200);
    s.target.n = 1000;
    s.algorithms = three_algorithms(kLogRegEta);
    s.metrics = {"f_rel"};
    return s;
  }
  if (name == "c-sweep") {
    ExperimentSpec s = base(name, "gaussian", 50);
    s.algorithms = {line("svrgvi", Algorithm::kSvrgvi, CPolicy::fixed(0.9))};
    s.sweep = SweepSpec{"c", {0.0, 0.5, 0.8, 1.0, 1.2, 1.5, 2.0}};
    s.metrics = {"kl"};
    return s;
  }
  if (name == "eta-sweep") {
    ExperimentSpec s = base(name, "gaussian", 100);
    s.algorithms = three_algorithms();
    s.sweep = SweepSpec{"eta", {0.125, 0.25, 0.5, 1.0}};
    s.metrics = {"kl"};
    return s;
  }
  if (name == "minibatch") {
    ExperimentSpec s = base(name, "gaussian", 10);
    s.algorithms = {line("sgvi", Algorithm::kSgvi, CPolicy::zero()),
                    line("svrgvi", Algorithm::kSvrgvi, CPolicy::fixed(0.9))};
    s.sweep = SweepSpec{"minibatch", {1.0, 10.0, 100.0}};
    s.metrics = {"kl"};
    return s;
  }
  if (name == "var-trace") {
    ExperimentSpec s = base(name, "gaussian", 10);
    s.algorithms = {line("svrgvi", Algorithm::kSvrgvi, CPolicy::fixed(0.9))};
    s.metrics = {"kl", "var_trace"};
    s.variance_samples = 5000;
    return s;
  }
  throw UnknownPreset("unknown preset '" + name + "'");
}

}  // namespace bwvi
