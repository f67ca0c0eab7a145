#include "whim/analysis.hpp"

#include "whim/error.hpp"

namespace whim {

BaselineMode parse_baseline_mode(std::string_view text) {
  if (text == "raw") return BaselineMode::Raw;
  if (text == "bootstrap") return BaselineMode::Bootstrap;
  fail(ErrorCode::InvalidArgument, "unknown baseline mode '" + std::string(text) + "'");
}

std::string_view baseline_mode_name(BaselineMode mode) {
  return mode == BaselineMode::Raw ? "raw" : "bootstrap";
}

WhatIfResult run_whatif(const Dataset& dataset, const WhatIfRequest& request) {
  const ScenarioSampler sampler(dataset, request.scenario.column, request.scenario.value, request.objective);
  const auto metric = dataset.column(request.objective.metric_column).numeric_values();

  WhatIfResult out;
  out.scenario = request.scenario;
  out.current_fraction = sampler.current_fraction();
  out.matching_rows = target_count(request.scenario.fraction, dataset.row_count());

  std::vector<std::uint32_t> hits;
  out.whatif = sampler.run(request.scenario.fraction, request.n_sample, request.seed, &hits);
  const EmpiricalSample whatif =
      EmpiricalSample::from_counts(metric, std::vector<std::uint64_t>(hits.begin(), hits.end()));

  EmpiricalSample baseline;
  double baseline_metric = 0.0;
  if (request.baseline_mode == BaselineMode::Raw) {
    auto values = metric_values(dataset, request.objective);
    baseline = EmpiricalSample::from_values(values);
    baseline_metric = aggregate(values, request.objective);
  } else {
    std::vector<std::uint32_t> base_hits;
    out.baseline_draws = bootstrap_baseline(dataset, request.objective, request.n_sample, request.seed, &base_hits);
    baseline = EmpiricalSample::from_counts(metric, std::vector<std::uint64_t>(base_hits.begin(), base_hits.end()));
    baseline_metric = out.baseline_draws->metric_mean;
  }
  out.report = compare(baseline, whatif, baseline_metric, out.whatif.metric_mean, request.compare);
  return out;
}

MarginResult run_margins(const Dataset& dataset, const MarginRequest& request) {
  const ScenarioSampler sampler(dataset, request.column, request.value, request.objective);
  MarginResult out;
  out.column = request.column;
  out.value = request.value;
  out.current_fraction = sampler.current_fraction();
  out.curve = marginal_curve(sampler, request.fractions, request.n_sample, request.seed, request.workers);
  if (request.optimize) {
    BoConfig bo = request.bo;
    bo.n_sample = request.n_sample;
    bo.seed = request.seed;
    bo.workers = request.workers;
    out.optimum = optimize_fraction(sampler, bo);
  }
  return out;
}

}  // namespace whim
