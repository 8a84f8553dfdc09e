#pragma once

// Experiment descriptions, presets, replicate execution and CSV/JSON output.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bwvi/estimators.hpp"
#include "bwvi/optimizers.hpp"
#include "bwvi/targets.hpp"

namespace bwvi {

struct TargetSpec {
  std::string kind = "gaussian";  // gaussian | student | logreg
  std::uint64_t data_seed = 2024;
  double nu = 4.0;  // student only
  long n = 1000;    // logreg only

  bool operator==(const TargetSpec&) const = default;
};

// One algorithm line of an experiment; expanded over dims, seeds and the sweep.
struct AlgorithmSpec {
  std::string label;
  Algorithm algorithm = Algorithm::kSvrgvi;
  double eta = 1.0;
  int steps = 300;
  CPolicy c_policy = CPolicy::fixed(0.9);
  int minibatch = 1;

  bool operator==(const AlgorithmSpec&) const = default;
};

// axis "c" applies to svrgvi lines (c = 0 becomes sgvi), "eta" to every line,
// "minibatch" to sgvi lines.
struct SweepSpec {
  std::string axis;
  std::vector<double> values;

  bool operator==(const SweepSpec&) const = default;
};

// mu_0 = N(mean * 1, cov_scale * I)
struct InitSpec {
  double mean = 0.0;
  double cov_scale = 1.0;

  bool operator==(const InitSpec&) const = default;
};

inline const std::vector<std::string> kKnownMetrics = {"kl", "f_rel", "w2", "var_trace",
                                                       "c_trace"};

struct ExperimentSpec {
  std::string name;
  TargetSpec target;
  std::vector<long> dims;
  std::vector<AlgorithmSpec> algorithms;
  std::vector<std::uint64_t> seeds;
  std::optional<SweepSpec> sweep;
  std::vector<std::string> metrics;
  int record_every = 1;
  int f_samples = 256;
  int variance_samples = 5000;
  bool record_timing = false;
  InitSpec init;

  bool has_metric(const std::string& m) const;
  void validate() const;  // throws SpecError

  bool operator==(const ExperimentSpec&) const = default;
};

inline const std::vector<std::string> kPresetNames = {
    "gaussian-d10", "gaussian-d50", "gaussian-d200", "student-d200", "logreg-d200",
    "c-sweep",      "eta-sweep",    "minibatch",     "var-trace"};

// Throws UnknownPreset.
ExperimentSpec preset(const std::string& name);

std::vector<std::uint64_t> default_seeds(int count);

struct RunPlan {
  std::string label;
  long dim = 0;
  RunConfig config;
};

// Sweep expansion x dims x seeds, in a fixed order.
std::vector<RunPlan> expand_runs(const ExperimentSpec& spec);

TargetPtr make_target(const TargetSpec& spec, long dim);
Gaussian make_init(const InitSpec& spec, long dim);

struct RunOutcome {
  RunPlan plan;
  Trace trace;
};

// Runs every plan (replicas in parallel, see worker_count()). Traces keep
// only the initial and final iterates.
std::vector<RunOutcome> execute(const ExperimentSpec& spec);

// BWVI_THREADS if set and positive, otherwise the hardware concurrency.
unsigned worker_count();

struct RunSummary {
  std::string label;
  long dim = 0;
  std::uint64_t seed = 0;
  std::string file;
  bool diverged = false;
  int steps_completed = 0;
  std::string failure;
};

struct ExperimentResult {
  std::filesystem::path dir;
  std::vector<RunSummary> runs;
};

// Writes traces/<label>_d<dim>_s<seed>.csv, aggregate.csv and manifest.json
// under out_dir. Output is byte-identical across reruns of the same spec.
ExperimentResult run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_dir);

// ---- trace CSV (iter,kl,f,w2sq,var_mc,var_vr,c_used,diverged,wall_ns)

inline constexpr const char* kTraceHeader = "iter,kl,f,w2sq,var_mc,var_vr,c_used,diverged,wall_ns";

void write_trace_csv(const std::vector<IterRecord>& records, std::ostream& out,
                     bool include_timing);
std::vector<IterRecord> read_trace_csv(std::istream& in);

// ---- aggregation

// Linear-interpolation quantile of an unsorted sample, p in [0, 1].
double quantile(std::vector<double> values, double p);

struct AggregateRow {
  std::string run;
  long dim = 0;
  int iter = 0;
  std::string metric;
  std::size_t count = 0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

inline constexpr const char* kAggregateHeader = "run,dim,iter,metric,count,median,q25,q75";

// Median and quartiles per (run label, dim, metric, iter) over replicas,
// skipping diverged rows. f_rel uses the smallest f over all runs at that dim.
std::vector<AggregateRow> aggregate(const std::vector<RunOutcome>& outcomes,
                                    bool include_f_rel);

void write_aggregate_csv(const std::vector<AggregateRow>& rows, std::ostream& out);

// Median of the final recorded KL over non-diverged replicas with this label.
std::optional<double> median_final_kl(const std::vector<RunOutcome>& outcomes,
                                      const std::string& label);

}  // namespace bwvi
