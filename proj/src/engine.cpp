#include "whim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <optional>

#include "whim/error.hpp"
#include "whim/parallel.hpp"
#include "whim/stats.hpp"

namespace whim {
namespace {

constexpr double kTinyBaseline = 1e-12;

struct ScenarioOutcome {
  std::optional<Recommendation> recommendation;
  std::optional<SkippedScenario> skipped;
};

ScenarioOutcome evaluate_scenario(const Dataset& dataset, const ScenarioSlot& slot, const EngineConfig& config,
                                  const EmpiricalSample& baseline_sample, double baseline_metric) {
  ScenarioOutcome out;
  const auto skip = [&](std::string reason) {
    out.skipped = SkippedScenario{slot.column, slot.value.label, std::move(reason)};
    return out;
  };
  try {
    const ScenarioSampler sampler(dataset, slot.column, slot.value, config.objective);
    const RowPartition& p = sampler.partition();
    if (p.matching.size() < config.min_support)
      return skip("insufficient_support: " + std::to_string(p.matching.size()) + " matching rows, minimum " +
                  std::to_string(config.min_support));
    if (p.complement.empty()) return skip("no_complement: every row matches this value");

    const OptimizationResult opt = optimize_fraction(sampler, config.bo_config());
    std::vector<std::uint32_t> hits;
    ResampleSummary projection =
        sampler.run(opt.x_star, config.n_sample, mix_seed(config.master_seed, "projection"), &hits);

    const auto metric = dataset.column(config.objective.metric_column).numeric_values();
    const std::vector<std::uint64_t> counts(hits.begin(), hits.end());
    const EmpiricalSample whatif = EmpiricalSample::from_counts(metric, counts);
    const KsResult ks = ks_two_sample(baseline_sample, whatif);

    Recommendation rec;
    rec.column = slot.column;
    rec.value = slot.value;
    rec.fraction = opt.x_star;
    rec.current_fraction = sampler.current_fraction();
    rec.baseline_metric = baseline_metric;
    rec.projected_metric = projection.metric_mean;
    rec.projected_std = projection.metric_std;
    rec.impact = impact_score(baseline_metric, projection.metric_mean);
    rec.ks_statistic = ks.statistic;
    rec.ks_p_value = ks.p_value;
    rec.significant = ks.p_value < config.alpha;
    rec.evaluations = opt.iterations;
    rec.per_draw = std::move(projection.per_draw);
    out.recommendation = std::move(rec);
  } catch (const Error& e) {
    return skip(std::string(code_name(e.code())) + ": " + e.what());
  }
  return out;
}

}  // namespace

void EngineConfig::validate(const Dataset& dataset) const {
  objective.validate(dataset);
  if (n_unique < 2) fail(ErrorCode::InvalidArgument, "n_unique must be at least 2");
  if (n_buckets < 2) fail(ErrorCode::InvalidArgument, "n_buckets must be at least 2");
  if (n_sample < 1) fail(ErrorCode::InvalidArgument, "n_sample must be at least 1");
  if (iterations < 1) fail(ErrorCode::InvalidArgument, "iterations must be at least 1");
  if (xi < 0.0) fail(ErrorCode::InvalidArgument, "xi must be non-negative");
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  for (const auto& name : include_columns) dataset.column(name);
  for (const auto& name : exclude_columns) dataset.column(name);
}

BoConfig EngineConfig::bo_config() const {
  BoConfig bo;
  bo.iterations = iterations;
  bo.init_points = init_points;
  bo.xi = xi;
  bo.n_sample = n_sample;
  bo.seed = master_seed;
  return bo;
}

double impact_score(double baseline_metric, double projected_metric) {
  const double change = std::abs(projected_metric - baseline_metric);
  return std::abs(baseline_metric) > kTinyBaseline ? change / std::abs(baseline_metric) : change;
}

std::vector<std::string> sweep_columns(const Dataset& dataset, const EngineConfig& config) {
  const auto listed = [](const std::vector<std::string>& list, const std::string& name) {
    return std::find(list.begin(), list.end(), name) != list.end();
  };
  std::vector<std::string> out;
  for (const Column& c : dataset.columns()) {
    if (c.name() == config.objective.metric_column) continue;
    if (!config.include_columns.empty() && !listed(config.include_columns, c.name())) continue;
    if (listed(config.exclude_columns, c.name())) continue;
    out.push_back(c.name());
  }
  return out;
}

std::vector<ScenarioSlot> enumerate_scenarios(const Dataset& dataset, const EngineConfig& config) {
  std::vector<ScenarioSlot> slots;
  for (const std::string& column : sweep_columns(dataset, config)) {
    for (ValueSelector& v : column_domain(dataset, column, config.n_unique, config.n_buckets))
      slots.push_back({column, std::move(v)});
  }
  return slots;
}

SweepResult generate_hypotheses(const Dataset& dataset, const EngineConfig& config, const ProgressCallback& progress) {
  config.validate(dataset);
  const auto columns = sweep_columns(dataset, config);
  if (columns.empty()) fail(ErrorCode::InvalidArgument, "no sweepable column after exclusions");

  SweepResult result;
  const std::vector<ScenarioSlot> slots = enumerate_scenarios(dataset, config);
  for (const std::string& column : columns) {
    const Column& c = dataset.column(column);
    if (c.is_numeric() && c.missing_count() == dataset.row_count())
      result.skipped_columns.push_back({column, {}, "all_missing: column has no values"});
  }

  std::vector<double> baseline_values = metric_values(dataset, config.objective);
  const EmpiricalSample baseline_sample = EmpiricalSample::from_values(baseline_values);
  result.baseline_metric = aggregate(baseline_values, config.objective);

  std::mutex progress_mutex;
  const auto report = [&](ProgressEvent event) {
    if (!progress) return;
    std::lock_guard lock(progress_mutex);
    progress(event);
  };

  std::vector<ScenarioOutcome> outcomes(slots.size());
  parallel_for(slots.size(), config.workers, [&](std::size_t i) {
    const ScenarioSlot& slot = slots[i];
    report({i, slots.size(), slot.column, slot.value.label, "started", {}});
    outcomes[i] = evaluate_scenario(dataset, slot, config, baseline_sample, result.baseline_metric);
    if (outcomes[i].skipped)
      report({i, slots.size(), slot.column, slot.value.label, "skipped", outcomes[i].skipped->reason});
    else
      report({i, slots.size(), slot.column, slot.value.label, "done", {}});
  });

  std::vector<Recommendation> recs;
  for (ScenarioOutcome& o : outcomes) {
    if (o.recommendation) recs.push_back(std::move(*o.recommendation));
    if (o.skipped) result.skipped.push_back(std::move(*o.skipped));
  }
  result.enumerated = slots.size();
  result.attempted = recs.size();
  result.recommendations = rank_recommendations(std::move(recs));
  return result;
}

std::vector<Recommendation> rank_recommendations(std::vector<Recommendation> recs) {
  std::sort(recs.begin(), recs.end(), [](const Recommendation& a, const Recommendation& b) {
    if (a.impact != b.impact) return a.impact > b.impact;
    const double ca = std::abs(a.absolute_change());
    const double cb = std::abs(b.absolute_change());
    if (ca != cb) return ca > cb;
    if (a.ks_p_value != b.ks_p_value) return a.ks_p_value < b.ks_p_value;
    if (a.column != b.column) return a.column < b.column;
    return a.value.label < b.value.label;
  });
  for (std::size_t i = 0; i < recs.size(); ++i) recs[i].rank = i + 1;
  return recs;
}

}  // namespace whim
