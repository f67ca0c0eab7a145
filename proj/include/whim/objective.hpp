#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "whim/dataset.hpp"

namespace whim {

enum class Aggregation { Mean, Sum, Percentile };
enum class Direction { Minimize, Maximize };

std::string_view aggregation_name(Aggregation op);
std::string_view direction_name(Direction direction);
/// Accepts "mean", "sum", "percentile", and the "pNN" shorthand (sets q).
Aggregation parse_aggregation(std::string_view text, double* q = nullptr);
Direction parse_direction(std::string_view text);

/// P(m): aggregation operator applied to a numeric metric column.
struct ObjectiveSpec {
  std::string metric_column;
  Aggregation op = Aggregation::Mean;
  double q = 50.0;
  Direction direction = Direction::Minimize;

  /// Throws on unknown/non-numeric metric or q outside (0, 100).
  void validate(const Dataset& dataset) const;
};

/// Linear-interpolation quantile of an ascending sample, p in [0, 1].
double quantile_sorted(std::span<const double> sorted, double p);

/// Applies the operator to non-missing values. The buffer may be reordered.
/// Throws ErrorCode::EmptySelection when it is empty.
double aggregate(std::span<double> values, const ObjectiveSpec& objective);

double eval_metric(const Dataset& dataset, const ObjectiveSpec& objective);
double eval_metric(const Dataset& dataset, std::span<const std::size_t> rows,
                   const ObjectiveSpec& objective);

/// Non-missing metric values over all rows.
std::vector<double> metric_values(const Dataset& dataset, const ObjectiveSpec& objective);

}  // namespace whim
