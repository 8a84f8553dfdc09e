#include "bwvi/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "bwvi/diagnostics.hpp"
#include "bwvi/errors.hpp"
#include "bwvi/harness.hpp"
#include "bwvi/serialization.hpp"

namespace bwvi {

namespace {

struct RunArgs {
  std::string preset_name;
  std::string config;
  std::string out;
  std::optional<int> seeds;
  std::optional<int> steps;
  std::optional<double> eta;
  bool timing = false;
};

struct TargetArgs {
  std::string kind = "gaussian";
  long dim = 10;
  std::uint64_t seed = 2024;
};

struct VarianceArgs {
  double c = 1.0;
  long n = 10000;
  std::uint64_t sample_seed = 1;
  double mean_shift = 0.5;
  double cov_scale = 1.5;
};

struct LaplaceArgs {
  int max_iter = 100;
  double tol = 1e-8;
};

void add_target_options(CLI::App* cmd, TargetArgs& t) {
  cmd->add_option("--target", t.kind, "gaussian | student | logreg")
      ->check(CLI::IsMember({"gaussian", "student", "logreg"}));
  cmd->add_option("--dim", t.dim, "dimension")->check(CLI::PositiveNumber);
  cmd->add_option("--data-seed", t.seed, "seed of the generated target");
}

TargetPtr build_target(const TargetArgs& a) {
  TargetSpec spec;
  spec.kind = a.kind;
  spec.data_seed = a.seed;
  return make_target(spec, a.dim);
}

// Reference Gaussian for a target: the optimum when known, else the Laplace fit.
Gaussian reference_gaussian(const Target& t) {
  if (t.info().optimum) return *t.info().optimum;
  return laplace_approx(t, Vector::Zero(t.dim()));
}

int do_run(const RunArgs& a) {
  ExperimentSpec spec;
  if (!a.preset_name.empty()) {
    spec = preset(a.preset_name);
  } else {
    std::ifstream f(a.config);
    if (!f) throw SpecError("cannot open config '" + a.config + "'");
    Json j;
    try {
      j = Json::parse(f);
    } catch (const Json::exception& e) {
      throw SpecError(std::string("config is not valid JSON: ") + e.what());
    }
    spec = experiment_spec_from_json(j);
  }
  if (a.seeds) spec.seeds = default_seeds(*a.seeds);
  for (AlgorithmSpec& alg : spec.algorithms) {
    if (a.steps) alg.steps = *a.steps;
    if (a.eta) alg.eta = *a.eta;
  }
  if (a.timing) spec.record_timing = true;
  spec.validate();

  const std::string out = a.out.empty() ? "out/" + spec.name : a.out;
  const ExperimentResult result = run_experiment(spec, out);
  int diverged = 0;
  for (const RunSummary& r : result.runs) diverged += r.diverged ? 1 : 0;
  std::cout << "wrote " << result.runs.size() << " traces to " << result.dir.string();
  if (diverged > 0) std::cout << " (" << diverged << " diverged)";
  std::cout << '\n';
  return 0;
}

int do_variance(const TargetArgs& ta, const VarianceArgs& va) {
  const TargetPtr t = build_target(ta);
  const Gaussian ref = reference_gaussian(*t);
  const Gaussian g(ref.mean() + Vector::Constant(ref.dim(), va.mean_shift),
                   va.cov_scale * ref.cov());
  Rng rng(va.sample_seed);
  std::cout << to_json(variance_gap_empirical(*t, g, va.c, va.n, rng)).dump(2) << '\n';
  return 0;
}

int do_bounds(const BoundInputs& in) {
  try {
    in.validate();
  } catch (const PreconditionViolated& e) {
    throw SpecError(e.what());
  }
  Json out = {{"inputs", to_json(in)}, {"convex", bound_convex(in)}};
  try {
    out["strongly_convex"] = bound_strongly_convex(in);
  } catch (const PreconditionViolated& e) {
    out["strongly_convex"] = nullptr;
    out["strongly_convex_error"] = e.what();
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

int do_laplace(const TargetArgs& ta, const LaplaceArgs& la) {
  const TargetPtr t = build_target(ta);
  const Gaussian g = laplace_approx(*t, Vector::Zero(t->dim()), la.max_iter, la.tol);
  std::cout << to_json(g).dump(2) << '\n';
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Bures-Wasserstein Gaussian variational inference"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run_cmd = app.add_subcommand("run", "run an experiment preset or JSON config");
  auto* preset_opt = run_cmd->add_option("--preset", run_args.preset_name, "preset name");
  auto* config_opt = run_cmd->add_option("--config", run_args.config, "JSON experiment spec");
  preset_opt->excludes(config_opt);
  run_cmd->add_option("--out", run_args.out, "output directory (default out/<name>)");
  run_cmd->add_option("--seeds", run_args.seeds, "replicate count")->check(CLI::PositiveNumber);
  run_cmd->add_option("--steps", run_args.steps, "iterations per run")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--eta", run_args.eta, "step size for every algorithm")
      ->check(CLI::PositiveNumber);
  run_cmd->add_flag("--timing", run_args.timing, "fill the wall_ns column");

  CLI::App* diag_cmd = app.add_subcommand("diag", "diagnostics");
  diag_cmd->require_subcommand(1);

  TargetArgs var_target;
  VarianceArgs var_args;
  CLI::App* var_cmd =
      diag_cmd->add_subcommand("variance", "empirical variance of both gradient estimators");
  add_target_options(var_cmd, var_target);
  var_cmd->add_option("--c", var_args.c, "control-variate coefficient");
  var_cmd->add_option("--n", var_args.n, "number of draws (>= 100)");
  var_cmd->add_option("--seed", var_args.sample_seed, "sampling seed");
  var_cmd->add_option("--mean-shift", var_args.mean_shift, "offset added to every mean entry");
  var_cmd->add_option("--cov-scale", var_args.cov_scale, "covariance multiplier")
      ->check(CLI::PositiveNumber);

  BoundInputs bounds;
  bounds.tau_max_inf = 1.0;
  bounds.tau_max_E = 1.0;
  CLI::App* bounds_cmd = diag_cmd->add_subcommand("bounds", "evaluate the convergence bounds");
  bounds_cmd->add_option("--alpha", bounds.alpha, "strong convexity")->required();
  bounds_cmd->add_option("--beta", bounds.beta, "smoothness")->required();
  bounds_cmd->add_option("--eta", bounds.eta, "step size")->required();
  bounds_cmd->add_option("--N", bounds.N, "iterations")->required();
  bounds_cmd->add_option("--d", bounds.d, "dimension")->required();
  bounds_cmd->add_option("--tau-inf", bounds.tau_max_inf, "sup-norm variance ratio bound");
  bounds_cmd->add_option("--tau-e", bounds.tau_max_E, "expected variance ratio bound");
  bounds_cmd->add_option("--w2", bounds.w2sq_init, "initial squared W2 distance")->required();
  bounds_cmd->add_option("--lambda-max", bounds.lambda_max_opt,
                         "largest eigenvalue of the optimal covariance")
      ->required();

  TargetArgs lap_target;
  LaplaceArgs lap_args;
  CLI::App* lap_cmd = app.add_subcommand("laplace", "Laplace approximation at the mode");
  add_target_options(lap_cmd, lap_target);
  lap_cmd->add_option("--max-iter", lap_args.max_iter, "Newton iterations")
      ->check(CLI::PositiveNumber);
  lap_cmd->add_option("--tol", lap_args.tol, "gradient-norm tolerance")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run_cmd->parsed()) {
      if (run_args.preset_name.empty() && run_args.config.empty()) {
        std::cerr << "run: one of --preset or --config is required\n";
        return 1;
      }
      return do_run(run_args);
    }
    if (var_cmd->parsed()) return do_variance(var_target, var_args);
    if (bounds_cmd->parsed()) return do_bounds(bounds);
    if (lap_cmd->parsed()) return do_laplace(lap_target, lap_args);
  } catch (const SpecError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace bwvi
