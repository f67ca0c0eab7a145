#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "whim/dataset.hpp"
#include "whim/engine.hpp"
#include "whim/objective.hpp"
#include "whim/resampler.hpp"

namespace whim {

/// Replays an observed change: slice A (time < split) is resampled at the
/// value fractions seen in slice B (time >= split) and the simulated metric
/// is scored against B's actual metric.
struct BacktestRequest {
  std::string time_column;
  std::string split;                 // numeric text for numeric time columns
  std::vector<std::string> columns;  // empty = every eligible column
  ObjectiveSpec objective;
  std::size_t n_sample = kDefaultSampleCount;
  std::uint64_t seed = 0;
  std::size_t n_unique = 20;  // numeric columns above this are not eligible
  unsigned workers = 1;
};

struct BacktestRow {
  std::string column;
  std::string value;
  double fraction_a = 0.0;
  double fraction_b = 0.0;
  double simulated_metric = 0.0;
  double simulated_std = 0.0;
  double actual_metric = 0.0;
  double absolute_error = 0.0;  // relative to |actual| unless actual is 0
  bool relative = true;
};

struct BacktestReport {
  std::string time_column;
  std::string split;
  std::size_t rows_a = 0;
  std::size_t rows_b = 0;
  std::vector<BacktestRow> rows;  // sorted by (column, value)
  std::vector<SkippedScenario> skipped;
  double mae = 0.0;
  double mae_std = 0.0;
};

BacktestReport backtest(const Dataset& dataset, const BacktestRequest& request);

/// Plain-text table: one line per evaluated value, then MAE (+- std).
std::string format_backtest_table(const BacktestReport& report);

}  // namespace whim
