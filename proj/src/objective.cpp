#include "whim/objective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "whim/error.hpp"

namespace whim {

std::string_view aggregation_name(Aggregation op) {
  switch (op) {
    case Aggregation::Mean: return "mean";
    case Aggregation::Sum: return "sum";
    case Aggregation::Percentile: return "percentile";
  }
  return "mean";
}

std::string_view direction_name(Direction direction) {
  return direction == Direction::Minimize ? "minimize" : "maximize";
}

Aggregation parse_aggregation(std::string_view text, double* q) {
  if (text == "mean") return Aggregation::Mean;
  if (text == "sum") return Aggregation::Sum;
  if (text == "percentile") return Aggregation::Percentile;
  if (text == "median") {
    if (q) *q = 50.0;
    return Aggregation::Percentile;
  }
  if (text.size() > 1 && text.front() == 'p') {
    if (const auto v = parse_real(text.substr(1))) {
      if (q) *q = *v;
      return Aggregation::Percentile;
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown operator '" + std::string(text) + "'");
}

Direction parse_direction(std::string_view text) {
  if (text == "minimize" || text == "min") return Direction::Minimize;
  if (text == "maximize" || text == "max") return Direction::Maximize;
  fail(ErrorCode::InvalidArgument, "unknown direction '" + std::string(text) + "'");
}

void ObjectiveSpec::validate(const Dataset& dataset) const {
  if (metric_column.empty()) fail(ErrorCode::InvalidArgument, "metric column is required");
  const Column& col = dataset.column(metric_column);
  if (!col.is_numeric()) fail(ErrorCode::WrongColumnKind, "metric column '" + metric_column + "' is not numeric");
  if (op == Aggregation::Percentile && !(q > 0.0 && q < 100.0))
    fail(ErrorCode::InvalidArgument, "percentile q must lie in (0, 100)");
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) fail(ErrorCode::EmptySelection, "quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

double aggregate(std::span<double> values, const ObjectiveSpec& objective) {
  if (values.empty()) fail(ErrorCode::EmptySelection, "no non-missing metric values in selection");
  switch (objective.op) {
    case Aggregation::Sum: return std::accumulate(values.begin(), values.end(), 0.0);
    case Aggregation::Mean:
      return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    case Aggregation::Percentile: {
      std::sort(values.begin(), values.end());
      return quantile_sorted(values, objective.q / 100.0);
    }
  }
  return 0.0;
}

std::vector<double> metric_values(const Dataset& dataset, const ObjectiveSpec& objective) {
  objective.validate(dataset);
  std::vector<double> out;
  for (double v : dataset.column(objective.metric_column).numeric_values())
    if (!std::isnan(v)) out.push_back(v);
  return out;
}

double eval_metric(const Dataset& dataset, const ObjectiveSpec& objective) {
  auto values = metric_values(dataset, objective);
  return aggregate(values, objective);
}

double eval_metric(const Dataset& dataset, std::span<const std::size_t> rows, const ObjectiveSpec& objective) {
  objective.validate(dataset);
  const auto column = dataset.column(objective.metric_column).numeric_values();
  std::vector<double> values;
  values.reserve(rows.size());
  for (std::size_t r : rows) {
    const double v = column[r];
    if (!std::isnan(v)) values.push_back(v);
  }
  return aggregate(values, objective);
}

}  // namespace whim
