#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "whim/objective.hpp"
#include "whim/resampler.hpp"

namespace whim {

struct BoConfig {
  std::size_t iterations = 15;  // total objective evaluations, initial design included
  std::size_t init_points = 5;
  double xi = 0.01;
  std::size_t n_sample = kDefaultSampleCount;
  std::uint64_t seed = 0;
  std::size_t grid_resolution = 100;  // candidates are {0, 1/r, ..., 1}
  unsigned workers = 1;
};

/// One noisy objective value: the mean of n_sample draws and their std.
struct Evaluation {
  double mean = 0.0;
  double std = 0.0;
  std::size_t n_sample = 1;
};

struct TracePoint {
  double x = 0.0;
  double metric_mean = 0.0;
  double metric_std = 0.0;
};

struct OptimizationResult {
  double x_star = 0.0;
  double f_star = 0.0;
  std::vector<TracePoint> trace;  // evaluation order
  std::vector<double> infeasible;
  std::size_t iterations = 0;
};

/// Returns std::nullopt when a fraction cannot be realized.
using FractionEvaluator = std::function<std::optional<Evaluation>(double fraction)>;

/// GP/EI Bayesian optimization over fractions in [0, 1]. The initial design
/// holds 0, 1, the current fraction and maximin fill points on the candidate
/// grid. Maximization is run as minimization of the negated objective.
/// Throws ScenarioInfeasible when no fraction can be evaluated.
OptimizationResult optimize_unit_interval(const FractionEvaluator& evaluate, Direction direction,
                                          double current_fraction, const BoConfig& config);

OptimizationResult optimize_fraction(const ScenarioSampler& sampler, const BoConfig& config);
OptimizationResult optimize_fraction(const Dataset& dataset, const std::string& column, const ValueSelector& value,
                                     const ObjectiveSpec& objective, const BoConfig& config);

/// Initial design used by optimize_unit_interval, before feasibility checks.
std::vector<double> initial_design(double current_fraction, std::size_t init_points, std::size_t grid_resolution);

struct MarginalPoint {
  double x = 0.0;
  bool feasible = false;
  double metric_mean = 0.0;
  double metric_std = 0.0;
};

std::vector<double> default_margin_grid();

/// repeated_resample at each fraction; infeasible fractions become gaps.
std::vector<MarginalPoint> marginal_curve(const ScenarioSampler& sampler, std::span<const double> fractions,
                                          std::size_t n_sample, std::uint64_t seed, unsigned workers = 1);

}  // namespace whim
