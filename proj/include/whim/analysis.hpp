#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "whim/bayesopt.hpp"
#include "whim/resampler.hpp"
#include "whim/stats.hpp"

namespace whim {

/// Raw: the dataset as loaded. Bootstrap: an equal-size plain bootstrap
/// pooled over n_sample draws.
enum class BaselineMode { Raw, Bootstrap };

BaselineMode parse_baseline_mode(std::string_view text);
std::string_view baseline_mode_name(BaselineMode mode);

struct WhatIfRequest {
  Scenario scenario;
  ObjectiveSpec objective;
  std::size_t n_sample = kDefaultSampleCount;
  std::uint64_t seed = 0;
  BaselineMode baseline_mode = BaselineMode::Raw;
  CompareOptions compare;
  unsigned workers = 1;
};

struct WhatIfResult {
  Scenario scenario;
  double current_fraction = 0.0;
  std::size_t matching_rows = 0;  // round(x * N) per draw
  ResampleSummary whatif;
  std::optional<ResampleSummary> baseline_draws;
  ComparisonReport report;
};

WhatIfResult run_whatif(const Dataset& dataset, const WhatIfRequest& request);

struct MarginRequest {
  std::string column;
  ValueSelector value;
  ObjectiveSpec objective;
  std::vector<double> fractions = default_margin_grid();
  std::size_t n_sample = kDefaultSampleCount;
  std::uint64_t seed = 0;
  bool optimize = true;
  BoConfig bo;  // n_sample and seed are taken from the request
  unsigned workers = 1;
};

struct MarginResult {
  std::string column;
  ValueSelector value;
  double current_fraction = 0.0;
  std::vector<MarginalPoint> curve;
  std::optional<OptimizationResult> optimum;
};

MarginResult run_margins(const Dataset& dataset, const MarginRequest& request);

}  // namespace whim
