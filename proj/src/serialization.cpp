#include "bwvi/serialization.hpp"

#include <string>

#include "bwvi/errors.hpp"

namespace bwvi {

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> number_or_null(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

Json to_json(const CPolicy& policy) {
  switch (policy.kind()) {
    case CPolicy::Kind::kZero:
      return {{"kind", "zero"}};
    case CPolicy::Kind::kFixed:
      return {{"kind", "fixed"}, {"c", policy.c()}};
    case CPolicy::Kind::kAdaptive:
      return {{"kind", "adaptive"}, {"lo", policy.lo()}, {"hi", policy.hi()}};
  }
  return {};
}

CPolicy c_policy_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "zero") return CPolicy::zero();
  if (kind == "fixed") return CPolicy::fixed(j.at("c").get<double>());
  if (kind == "adaptive") {
    return CPolicy::adaptive(j.value("lo", CPolicy::kDefaultLo),
                             j.value("hi", CPolicy::kDefaultHi));
  }
  throw SpecError("unknown c_policy kind '" + kind + "'");
}

Json to_json(const ExperimentSpec& spec) {
  Json algos = Json::array();
  for (const auto& a : spec.algorithms) {
    algos.push_back({{"label", a.label},
                     {"algorithm", to_string(a.algorithm)},
                     {"eta", a.eta},
                     {"steps", a.steps},
                     {"c_policy", to_json(a.c_policy)},
                     {"minibatch", a.minibatch}});
  }
  Json sweep = nullptr;
  if (spec.sweep) sweep = {{"axis", spec.sweep->axis}, {"values", spec.sweep->values}};
  return {{"name", spec.name},
          {"target",
           {{"kind", spec.target.kind},
            {"data_seed", spec.target.data_seed},
            {"nu", spec.target.nu},
            {"n", spec.target.n}}},
          {"dims", spec.dims},
          {"algorithms", algos},
          {"seeds", spec.seeds},
          {"sweep", sweep},
          {"metrics", spec.metrics},
          {"record_every", spec.record_every},
          {"f_samples", spec.f_samples},
          {"variance_samples", spec.variance_samples},
          {"record_timing", spec.record_timing},
          {"init", {{"mean", spec.init.mean}, {"cov_scale", spec.init.cov_scale}}}};
}

ExperimentSpec experiment_spec_from_json(const Json& j) {
  try {
    ExperimentSpec spec;
    spec.name = j.at("name").get<std::string>();
    const Json& t = j.at("target");
    spec.target.kind = t.at("kind").get<std::string>();
    spec.target.data_seed = t.value("data_seed", spec.target.data_seed);
    spec.target.nu = t.value("nu", spec.target.nu);
    spec.target.n = t.value("n", spec.target.n);
    spec.dims = j.at("dims").get<std::vector<long>>();
    for (const Json& a : j.at("algorithms")) {
      AlgorithmSpec algo;
      algo.algorithm = algorithm_from_string(a.at("algorithm").get<std::string>());
      algo.label = a.value("label", to_string(algo.algorithm));
      algo.eta = a.value("eta", algo.eta);
      algo.steps = a.value("steps", algo.steps);
      if (a.contains("c_policy")) {
        algo.c_policy = c_policy_from_json(a.at("c_policy"));
      } else {
        algo.c_policy = algo.algorithm == Algorithm::kSvrgvi ? CPolicy::fixed(0.9) : CPolicy::zero();
      }
      algo.minibatch = a.value("minibatch", algo.minibatch);
      spec.algorithms.push_back(std::move(algo));
    }
    spec.seeds = j.contains("seeds") ? j.at("seeds").get<std::vector<std::uint64_t>>()
                                     : default_seeds(10);
    if (j.contains("sweep") && !j.at("sweep").is_null()) {
      spec.sweep = SweepSpec{j.at("sweep").at("axis").get<std::string>(),
                             j.at("sweep").at("values").get<std::vector<double>>()};
    }
    spec.metrics = j.value("metrics", std::vector<std::string>{"kl"});
    spec.record_every = j.value("record_every", spec.record_every);
    spec.f_samples = j.value("f_samples", spec.f_samples);
    spec.variance_samples = j.value("variance_samples", spec.variance_samples);
    spec.record_timing = j.value("record_timing", spec.record_timing);
    if (j.contains("init")) {
      spec.init.mean = j.at("init").value("mean", spec.init.mean);
      spec.init.cov_scale = j.at("init").value("cov_scale", spec.init.cov_scale);
    }
    spec.validate();
    return spec;
  } catch (const Json::exception& e) {
    throw SpecError(std::string("malformed experiment spec: ") + e.what());
  }
}

Json to_json(const VarianceReport& r) {
  return {{"var_mc", r.var_mc},
          {"var_vr", r.var_vr},
          {"gap_empirical", r.gap_empirical},
          {"gap_analytic", optional_number(r.gap_analytic)},
          {"var_mc_analytic", optional_number(r.var_mc_analytic)},
          {"c_used", r.c_used},
          {"c_star", r.c_star},
          {"tau_hat", r.tau_hat},
          {"n_samples", r.n_samples},
          {"standard_error", r.standard_error}};
}

VarianceReport variance_report_from_json(const Json& j) {
  VarianceReport r;
  r.var_mc = j.at("var_mc").get<double>();
  r.var_vr = j.at("var_vr").get<double>();
  r.gap_empirical = j.at("gap_empirical").get<double>();
  r.gap_analytic = number_or_null(j, "gap_analytic");
  r.var_mc_analytic = number_or_null(j, "var_mc_analytic");
  r.c_used = j.at("c_used").get<double>();
  r.c_star = j.at("c_star").get<double>();
  r.tau_hat = j.at("tau_hat").get<double>();
  r.n_samples = j.at("n_samples").get<long>();
  r.standard_error = j.at("standard_error").get<double>();
  return r;
}

Json to_json(const BoundInputs& in) {
  return {{"alpha", in.alpha},           {"beta", in.beta},
          {"eta", in.eta},               {"N", in.N},
          {"d", in.d},                   {"tau_max_inf", in.tau_max_inf},
          {"tau_max_E", in.tau_max_E},   {"w2sq_init", in.w2sq_init},
          {"lambda_max_opt", in.lambda_max_opt}};
}

Json to_json(const Gaussian& g) {
  Json cov = Json::array();
  for (Eigen::Index i = 0; i < g.dim(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(g.dim()));
    for (Eigen::Index k = 0; k < g.dim(); ++k) row[static_cast<std::size_t>(k)] = g.cov()(i, k);
    cov.push_back(row);
  }
  std::vector<double> mean(g.mean().data(), g.mean().data() + g.dim());
  return {{"dim", g.dim()}, {"mean", mean}, {"cov", cov}};
}

}  // namespace bwvi
