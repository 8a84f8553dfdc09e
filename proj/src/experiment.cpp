#include "bwvi/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "bwvi/errors.hpp"
#include "bwvi/serialization.hpp"

namespace bwvi {

namespace fs = std::filesystem;

namespace {

std::string compact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<AlgorithmSpec> expand_sweep(const ExperimentSpec& spec) {
  if (!spec.sweep) return spec.algorithms;
  std::vector<AlgorithmSpec> out;
  const SweepSpec& sweep = *spec.sweep;
  for (const AlgorithmSpec& base : spec.algorithms) {
    const bool applies =
        sweep.axis == "eta" || (sweep.axis == "c" && base.algorithm == Algorithm::kSvrgvi) ||
        (sweep.axis == "minibatch" && base.algorithm == Algorithm::kSgvi);
    if (!applies) {
      out.push_back(base);
      continue;
    }
    for (double v : sweep.values) {
      AlgorithmSpec a = base;
      if (sweep.axis == "c") {
        a.label = base.label + "_c" + compact(v);
        if (v == 0.0) {
          a.algorithm = Algorithm::kSgvi;
          a.c_policy = CPolicy::zero();
        } else {
          a.c_policy = CPolicy::fixed(v);
        }
      } else if (sweep.axis == "eta") {
        a.label = base.label + "_eta" + compact(v);
        a.eta = v;
      } else {
        if (v < 1.0 || v != std::floor(v)) throw SpecError("minibatch sweep needs integers >= 1");
        a.label = base.label + "_m" + compact(v);
        a.minibatch = static_cast<int>(v);
      }
      out.push_back(std::move(a));
    }
  }
  return out;
}

std::string trace_file_name(const RunPlan& plan) {
  std::string label = plan.label;
  for (char& ch : label) {
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-' || ch == '_')) {
      ch = '_';
    }
  }
  return "traces/" + label + "_d" + std::to_string(plan.dim) + "_s" +
         std::to_string(plan.config.seed) + ".csv";
}

}  // namespace

bool ExperimentSpec::has_metric(const std::string& m) const {
  return std::find(metrics.begin(), metrics.end(), m) != metrics.end();
}

void ExperimentSpec::validate() const {
  if (name.empty()) throw SpecError("experiment: name must not be empty");
  if (target.kind != "gaussian" && target.kind != "student" && target.kind != "logreg") {
    throw SpecError("experiment: unknown target kind '" + target.kind + "'");
  }
  if (target.kind == "student" && !(target.nu > 0.0)) throw SpecError("experiment: nu must be > 0");
  if (target.kind == "logreg" && target.n < 1) throw SpecError("experiment: n must be >= 1");
  if (dims.empty()) throw SpecError("experiment: dims must not be empty");
  for (long d : dims) {
    if (d < 1) throw SpecError("experiment: dims must be >= 1");
  }
  if (algorithms.empty()) throw SpecError("experiment: no algorithms");
  if (seeds.empty()) throw SpecError("experiment: replicate count must be >= 1");
  for (const auto& m : metrics) {
    if (std::find(kKnownMetrics.begin(), kKnownMetrics.end(), m) == kKnownMetrics.end()) {
      throw SpecError("experiment: unknown metric '" + m + "'");
    }
  }
  if (sweep) {
    if (sweep->axis != "c" && sweep->axis != "eta" && sweep->axis != "minibatch") {
      throw SpecError("experiment: unknown sweep axis '" + sweep->axis + "'");
    }
    if (sweep->values.empty()) throw SpecError("experiment: empty sweep");
  }
  if (record_every < 1) throw SpecError("experiment: record_every must be >= 1");
  if (has_metric("f_rel") && f_samples < 1) throw SpecError("experiment: f_samples must be >= 1");
  if (has_metric("var_trace") && variance_samples < 100) {
    throw SpecError("experiment: variance_samples must be >= 100");
  }
  if (!(init.cov_scale > 0.0) || !std::isfinite(init.mean)) {
    throw SpecError("experiment: invalid init");
  }
  std::set<std::string> labels;
  for (const AlgorithmSpec& a : expand_sweep(*this)) {
    if (a.label.empty()) throw SpecError("experiment: empty algorithm label");
    if (!labels.insert(a.label).second) {
      throw SpecError("experiment: duplicate run label '" + a.label + "'");
    }
  }
  for (const RunPlan& plan : expand_runs(*this)) plan.config.validate();
}

std::vector<std::uint64_t> default_seeds(int count) {
  std::vector<std::uint64_t> seeds;
  for (int i = 1; i <= count; ++i) seeds.push_back(static_cast<std::uint64_t>(i));
  return seeds;
}

std::vector<RunPlan> expand_runs(const ExperimentSpec& spec) {
  std::vector<RunPlan> plans;
  const std::vector<AlgorithmSpec> algos = expand_sweep(spec);
  for (long dim : spec.dims) {
    for (const AlgorithmSpec& a : algos) {
      for (std::uint64_t seed : spec.seeds) {
        RunPlan plan;
        plan.label = a.label;
        plan.dim = dim;
        RunConfig& c = plan.config;
        c.algorithm = a.algorithm;
        c.eta = a.eta;
        c.steps = a.steps;
        c.c_policy = a.c_policy;
        c.minibatch = a.minibatch;
        c.seed = seed;
        c.record_every = spec.record_every;
        c.metrics.kl = spec.has_metric("kl");
        c.metrics.w2 = spec.has_metric("w2");
        c.metrics.f_samples = spec.has_metric("f_rel") ? spec.f_samples : 0;
        c.metrics.variance_samples = spec.has_metric("var_trace") ? spec.variance_samples : 0;
        c.keep_iterates = false;
        plans.push_back(std::move(plan));
      }
    }
  }
  return plans;
}

TargetPtr make_target(const TargetSpec& spec, long dim) {
  Rng rng(derive_seed(spec.data_seed, static_cast<std::uint64_t>(dim)));
  if (spec.kind == "gaussian") return random_gaussian_target(dim, rng);
  if (spec.kind == "student") {
    Vector loc(dim);
    for (long i = 0; i < dim; ++i) loc(i) = rng.uniform(-2.0, 2.0);
    Matrix scale = random_spd_matrix(dim, rng, kRandomCovFloor);
    return student_t_target(std::move(loc), std::move(scale), spec.nu);
  }
  if (spec.kind == "logreg") return logreg_target(generate_logreg_data(spec.n, dim, rng));
  throw SpecError("unknown target kind '" + spec.kind + "'");
}

Gaussian make_init(const InitSpec& spec, long dim) {
  return Gaussian(Vector::Constant(dim, spec.mean), spec.cov_scale * Matrix::Identity(dim, dim));
}

unsigned worker_count() {
  if (const char* env = std::getenv("BWVI_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<RunOutcome> execute(const ExperimentSpec& spec) {
  spec.validate();
  std::map<long, TargetPtr> targets;
  for (long d : spec.dims) targets.emplace(d, make_target(spec.target, d));

  const std::vector<RunPlan> plans = expand_runs(spec);
  std::vector<std::optional<Trace>> traces(plans.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= plans.size()) return;
      try {
        const RunPlan& plan = plans[i];
        traces[i] = run(plan.config, *targets.at(plan.dim), make_init(spec.init, plan.dim));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const unsigned n_workers =
      std::min<unsigned>(worker_count(), static_cast<unsigned>(plans.size()));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  std::vector<RunOutcome> out;
  out.reserve(plans.size());
  for (std::size_t i = 0; i < plans.size(); ++i) {
    out.push_back(RunOutcome{plans[i], std::move(*traces[i])});
  }
  return out;
}

// ------------------------------------------------------------------ CSV

void write_trace_csv(const std::vector<IterRecord>& records, std::ostream& out,
                     bool include_timing) {
  auto cell = [&](const std::optional<double>& v) {
    if (v) out << exact(*v);
  };
  out << kTraceHeader << '\n';
  for (const IterRecord& r : records) {
    out << r.iter << ',';
    cell(r.kl);
    out << ',';
    cell(r.f);
    out << ',';
    cell(r.w2sq);
    out << ',';
    cell(r.var_mc);
    out << ',';
    cell(r.var_vr);
    out << ',' << exact(r.c_used) << ',' << (r.diverged ? 1 : 0) << ',';
    if (include_timing) out << r.wall_ns;
    out << '\n';
  }
}

std::vector<IterRecord> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw SpecError("trace csv: unexpected header");
  }
  auto optional_cell = [](const std::string& s) -> std::optional<double> {
    if (s.empty()) return std::nullopt;
    return std::stod(s);
  };
  std::vector<IterRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 9) throw SpecError("trace csv: row must have 9 cells");
    IterRecord r;
    r.iter = std::stoi(cells[0]);
    r.kl = optional_cell(cells[1]);
    r.f = optional_cell(cells[2]);
    r.w2sq = optional_cell(cells[3]);
    r.var_mc = optional_cell(cells[4]);
    r.var_vr = optional_cell(cells[5]);
    r.c_used = std::stod(cells[6]);
    r.diverged = cells[7] == "1";
    r.wall_ns = cells[8].empty() ? 0 : std::stoll(cells[8]);
    records.push_back(r);
  }
  return records;
}

// ------------------------------------------------------------------ aggregation

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw PreconditionViolated("quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double h = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<AggregateRow> aggregate(const std::vector<RunOutcome>& outcomes, bool include_f_rel) {
  std::map<long, double> f_best;
  if (include_f_rel) {
    for (const RunOutcome& o : outcomes) {
      for (const IterRecord& r : o.trace.records) {
        if (r.diverged || !r.f) continue;
        auto [it, inserted] = f_best.emplace(o.plan.dim, *r.f);
        if (!inserted) it->second = std::min(it->second, *r.f);
      }
    }
  }

  using Extractor = std::optional<double> (*)(const IterRecord&);
  struct MetricDef {
    const char* name;
    Extractor get;
  };
  static const MetricDef kMetrics[] = {
      {"kl", [](const IterRecord& r) { return r.kl; }},
      {"f", [](const IterRecord& r) { return r.f; }},
      {"w2sq", [](const IterRecord& r) { return r.w2sq; }},
      {"var_mc", [](const IterRecord& r) { return r.var_mc; }},
      {"var_vr", [](const IterRecord& r) { return r.var_vr; }},
      {"c_used", [](const IterRecord& r) { return std::optional<double>(r.c_used); }},
  };

  // Group keys in first-appearance order of (label, dim).
  std::vector<std::pair<std::string, long>> groups;
  for (const RunOutcome& o : outcomes) {
    const auto key = std::make_pair(o.plan.label, o.plan.dim);
    if (std::find(groups.begin(), groups.end(), key) == groups.end()) groups.push_back(key);
  }

  std::vector<AggregateRow> rows;
  auto emit = [&](const std::string& label, long dim, const std::string& metric,
                  const std::map<int, std::vector<double>>& by_iter) {
    for (const auto& [iter, values] : by_iter) {
      if (values.empty()) continue;
      rows.push_back(AggregateRow{label, dim, iter, metric, values.size(), quantile(values, 0.5),
                                  quantile(values, 0.25), quantile(values, 0.75)});
    }
  };
  for (const auto& [label, dim] : groups) {
    for (const MetricDef& m : kMetrics) {
      std::map<int, std::vector<double>> by_iter;
      for (const RunOutcome& o : outcomes) {
        if (o.plan.label != label || o.plan.dim != dim) continue;
        for (const IterRecord& r : o.trace.records) {
          if (r.diverged) continue;
          if (const auto v = m.get(r)) by_iter[r.iter].push_back(*v);
        }
      }
      emit(label, dim, m.name, by_iter);
    }
    if (include_f_rel && f_best.count(dim)) {
      std::map<int, std::vector<double>> by_iter;
      for (const RunOutcome& o : outcomes) {
        if (o.plan.label != label || o.plan.dim != dim) continue;
        for (const IterRecord& r : o.trace.records) {
          if (!r.diverged && r.f) by_iter[r.iter].push_back(*r.f - f_best.at(dim));
        }
      }
      emit(label, dim, "f_rel", by_iter);
    }
  }
  return rows;
}

void write_aggregate_csv(const std::vector<AggregateRow>& rows, std::ostream& out) {
  out << kAggregateHeader << '\n';
  for (const AggregateRow& r : rows) {
    out << r.run << ',' << r.dim << ',' << r.iter << ',' << r.metric << ',' << r.count << ','
        << exact(r.median) << ',' << exact(r.q25) << ',' << exact(r.q75) << '\n';
  }
}

std::optional<double> median_final_kl(const std::vector<RunOutcome>& outcomes,
                                      const std::string& label) {
  std::vector<double> finals;
  for (const RunOutcome& o : outcomes) {
    if (o.plan.label != label || o.trace.diverged || o.trace.records.empty()) continue;
    if (const auto kl = o.trace.records.back().kl) finals.push_back(*kl);
  }
  if (finals.empty()) return std::nullopt;
  return quantile(finals, 0.5);
}

// ------------------------------------------------------------------ output

ExperimentResult run_experiment(const ExperimentSpec& spec, const fs::path& out_dir) {
  spec.validate();
  const std::vector<RunOutcome> outcomes = execute(spec);

  fs::create_directories(out_dir / "traces");
  ExperimentResult result;
  result.dir = out_dir;
  Json runs = Json::array();
  std::map<std::string, int> failures;
  for (const RunOutcome& o : outcomes) {
    RunSummary s;
    s.label = o.plan.label;
    s.dim = o.plan.dim;
    s.seed = o.plan.config.seed;
    s.file = trace_file_name(o.plan);
    s.diverged = o.trace.diverged;
    s.steps_completed = o.trace.steps_completed;
    s.failure = o.trace.failure;
    {
      std::ofstream f(out_dir / s.file, std::ios::binary);
      if (!f) throw Error("cannot write " + (out_dir / s.file).string());
      write_trace_csv(o.trace.records, f, spec.record_timing);
    }
    if (s.diverged) ++failures[s.label];
    runs.push_back({{"label", s.label},
                    {"algorithm", to_string(o.plan.config.algorithm)},
                    {"dim", s.dim},
                    {"seed", s.seed},
                    {"eta", o.plan.config.eta},
                    {"steps", o.plan.config.steps},
                    {"minibatch", o.plan.config.minibatch},
                    {"c_policy", to_json(o.plan.config.c_policy)},
                    {"file", s.file},
                    {"diverged", s.diverged},
                    {"steps_completed", s.steps_completed},
                    {"failure", s.failure}});
    result.runs.push_back(std::move(s));
  }

  const bool f_rel = spec.has_metric("f_rel");
  const std::vector<AggregateRow> rows = aggregate(outcomes, f_rel);
  {
    std::ofstream f(out_dir / "aggregate.csv", std::ios::binary);
    if (!f) throw Error("cannot write aggregate.csv");
    write_aggregate_csv(rows, f);
  }

  Json target_info = Json::array();
  for (long d : spec.dims) {
    const TargetPtr t = make_target(spec.target, d);
    Matrix shape;
    if (const auto* g = dynamic_cast<const GaussianTarget*>(t.get())) {
      shape = g->distribution().cov();
    } else if (const auto* s = dynamic_cast<const StudentTTarget*>(t.get())) {
      shape = s->scale();
    } else if (const auto* l = dynamic_cast<const LogRegTarget*>(t.get())) {
      shape = l->data().x.transpose() * l->data().x;
    }
    const Vector eig = linalg::sym_eigen(shape).values;
    const TargetInfo& info = t->info();
    target_info.push_back({{"dim", d},
                           {"kind", info.kind},
                           {"data_seed", spec.target.data_seed},
                           {"generator_seed", derive_seed(spec.target.data_seed,
                                                          static_cast<std::uint64_t>(d))},
                           {"condition_number", eig(eig.size() - 1) / eig(0)},
                           {"alpha", info.alpha ? Json(*info.alpha) : Json(nullptr)},
                           {"beta", info.beta ? Json(*info.beta) : Json(nullptr)}});
  }

  Json manifest = {{"spec", to_json(spec)},
                   {"version", "bwvi 0.1.0"},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                 std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"rng", "mt19937_64 / std::normal_distribution, seeds via splitmix64"},
                   {"target_generator",
                    "mean ~ U[-2,2]^d; cov = A A^T / d + " + compact(kRandomCovFloor) + " I"},
                   {"targets", target_info},
                   {"trace_columns", kTraceHeader},
                   {"aggregate_columns", kAggregateHeader},
                   {"runs", runs},
                   {"failures", failures}};
  std::ofstream f(out_dir / "manifest.json", std::ios::binary);
  if (!f) throw Error("cannot write manifest.json");
  f << manifest.dump(2) << '\n';
  return result;
}

}  // namespace bwvi
