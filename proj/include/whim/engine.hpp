#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "whim/bayesopt.hpp"
#include "whim/dataset.hpp"
#include "whim/objective.hpp"
#include "whim/resampler.hpp"
#include "whim/selection.hpp"

namespace whim {

struct EngineConfig {
  ObjectiveSpec objective;
  std::size_t n_sample = kDefaultSampleCount;
  std::size_t n_unique = 20;   // numeric columns with more distinct values are bucketed
  std::size_t n_buckets = 10;
  std::size_t min_support = 5; // minimum matching-stratum size
  std::size_t iterations = 15;
  std::size_t init_points = 5;
  double xi = 0.01;
  std::uint64_t master_seed = 0;
  std::vector<std::string> include_columns;  // empty = all
  std::vector<std::string> exclude_columns;
  double alpha = 0.05;
  unsigned workers = 1;

  void validate(const Dataset& dataset) const;
  BoConfig bo_config() const;
};

struct Recommendation {
  std::string column;
  ValueSelector value;
  double fraction = 0.0;  // x*
  double current_fraction = 0.0;
  double baseline_metric = 0.0;
  double projected_metric = 0.0;
  double projected_std = 0.0;
  double impact = 0.0;
  double ks_statistic = 0.0;
  double ks_p_value = 1.0;
  bool significant = false;
  std::size_t rank = 0;
  std::size_t evaluations = 0;
  std::vector<double> per_draw;

  double absolute_change() const { return projected_metric - baseline_metric; }
};

struct SkippedScenario {
  std::string column;
  std::string label;
  std::string reason;
};

struct SweepResult {
  std::vector<Recommendation> recommendations;  // ranked
  std::vector<SkippedScenario> skipped;          // enumeration order
  std::vector<SkippedScenario> skipped_columns;  // columns with nothing to enumerate
  std::size_t enumerated = 0;
  std::size_t attempted = 0;
  double baseline_metric = 0.0;
};

struct ProgressEvent {
  std::size_t index = 0;
  std::size_t total = 0;
  std::string column;
  std::string label;
  std::string status;  // "started" | "done" | "skipped"
  std::string detail;
};

/// Called from worker threads, one call at a time.
using ProgressCallback = std::function<void(const ProgressEvent&)>;

/// Relative change |projected - baseline| / |baseline|, or the absolute
/// change when the baseline is (numerically) zero.
double impact_score(double baseline_metric, double projected_metric);

/// Columns the sweep visits, in dataset order.
std::vector<std::string> sweep_columns(const Dataset& dataset, const EngineConfig& config);

struct ScenarioSlot {
  std::string column;
  ValueSelector value;
};

std::vector<ScenarioSlot> enumerate_scenarios(const Dataset& dataset, const EngineConfig& config);

/// Sweeps every column and (bucketed) value, optimizes each scenario's
/// fraction and ranks the outcomes. Per-scenario failures land in `skipped`.
SweepResult generate_hypotheses(const Dataset& dataset, const EngineConfig& config,
                                const ProgressCallback& progress = {});

/// Impact descending; ties by larger |change|, smaller KS p, then column and
/// value label. Assigns dense ranks from 1.
std::vector<Recommendation> rank_recommendations(std::vector<Recommendation> recommendations);

}  // namespace whim
