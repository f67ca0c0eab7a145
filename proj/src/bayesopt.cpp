#include "whim/bayesopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "whim/error.hpp"
#include "whim/gaussian_process.hpp"

namespace whim {
namespace {

constexpr double kSameX = 1e-9;

bool contains_x(std::span<const double> xs, double x) {
  return std::any_of(xs.begin(), xs.end(), [&](double v) { return std::abs(v - x) < kSameX; });
}

}  // namespace

std::vector<double> initial_design(double current_fraction, std::size_t init_points, std::size_t grid_resolution) {
  std::vector<double> design;
  for (double x : {0.0, 1.0, std::clamp(current_fraction, 0.0, 1.0)}) {
    if (design.size() < init_points && !contains_x(design, x)) design.push_back(x);
  }
  const auto r = static_cast<double>(grid_resolution);
  while (design.size() < init_points) {
    double best_x = -1.0;
    double best_gap = 0.0;
    for (std::size_t i = 0; i <= grid_resolution; ++i) {
      const double x = static_cast<double>(i) / r;
      double gap = std::numeric_limits<double>::infinity();
      for (double d : design) gap = std::min(gap, std::abs(d - x));
      if (gap > best_gap + kSameX) {
        best_gap = gap;
        best_x = x;
      }
    }
    if (best_x < 0.0) break;
    design.push_back(best_x);
  }
  return design;
}

OptimizationResult optimize_unit_interval(const FractionEvaluator& evaluate, Direction direction,
                                          double current_fraction, const BoConfig& config) {
  if (config.grid_resolution < 1) fail(ErrorCode::InvalidArgument, "grid resolution must be at least 1");
  if (config.xi < 0.0) fail(ErrorCode::InvalidArgument, "xi must be non-negative");
  const double sign = direction == Direction::Maximize ? -1.0 : 1.0;

  OptimizationResult result;
  std::vector<double> xs;
  std::vector<double> internal;  // sign * metric_mean, always minimized
  std::vector<double> variance;  // variance of each observed mean
  const auto try_point = [&](double x) {
    const auto e = evaluate(x);
    if (!e) {
      result.infeasible.push_back(x);
      return;
    }
    result.trace.push_back({x, e->mean, e->std});
    xs.push_back(x);
    internal.push_back(sign * e->mean);
    variance.push_back(e->std * e->std / static_cast<double>(std::max<std::size_t>(e->n_sample, 1)));
  };

  for (double x : initial_design(current_fraction, config.init_points, config.grid_resolution)) {
    if (result.trace.size() >= config.iterations) break;
    try_point(x);
  }

  const auto r = static_cast<double>(config.grid_resolution);
  while (result.trace.size() < config.iterations) {
    std::vector<double> candidates;
    for (std::size_t i = 0; i <= config.grid_resolution; ++i) {
      const double x = static_cast<double>(i) / r;
      if (!contains_x(xs, x) && !contains_x(result.infeasible, x)) candidates.push_back(x);
    }
    if (candidates.empty()) break;
    if (xs.empty()) {
      try_point(candidates.front());
      continue;
    }

    const double mu = std::accumulate(internal.begin(), internal.end(), 0.0) / static_cast<double>(internal.size());
    double ss = 0.0;
    for (double v : internal) ss += (v - mu) * (v - mu);
    double scale = internal.size() > 1 ? std::sqrt(ss / static_cast<double>(internal.size() - 1)) : 0.0;
    if (!(scale > 0.0)) scale = 1.0;
    std::vector<double> ys(internal.size());
    std::vector<double> noise(internal.size());
    for (std::size_t i = 0; i < internal.size(); ++i) {
      ys[i] = (internal[i] - mu) / scale;
      noise[i] = variance[i] / (scale * scale);
    }
    const GaussianProcess gp = fit_gaussian_process(xs, ys, noise);
    const double f_best = *std::min_element(ys.begin(), ys.end());

    double best_x = candidates.front();
    double best_ei = -1.0;
    for (double x : candidates) {
      const double ei = expected_improvement(gp, x, f_best, config.xi);
      if (ei > best_ei) {
        best_ei = ei;
        best_x = x;
      }
    }
    try_point(best_x);
  }

  if (result.trace.empty()) fail(ErrorCode::ScenarioInfeasible, "no fraction of this scenario can be evaluated");
  const auto best = std::min_element(internal.begin(), internal.end()) - internal.begin();
  result.x_star = result.trace[static_cast<std::size_t>(best)].x;
  result.f_star = result.trace[static_cast<std::size_t>(best)].metric_mean;
  result.iterations = result.trace.size();
  return result;
}

OptimizationResult optimize_fraction(const ScenarioSampler& sampler, const BoConfig& config) {
  const FractionEvaluator evaluate = [&](double x) -> std::optional<Evaluation> {
    if (!sampler.feasible(x)) return std::nullopt;
    const ResampleSummary s = sampler.run(x, config.n_sample, config.seed, nullptr, config.workers);
    return Evaluation{s.metric_mean, s.metric_std, config.n_sample};
  };
  return optimize_unit_interval(evaluate, sampler.objective().direction, sampler.current_fraction(), config);
}

OptimizationResult optimize_fraction(const Dataset& dataset, const std::string& column, const ValueSelector& value,
                                     const ObjectiveSpec& objective, const BoConfig& config) {
  const ScenarioSampler sampler(dataset, column, value, objective);
  return optimize_fraction(sampler, config);
}

std::vector<double> default_margin_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
  return grid;
}

std::vector<MarginalPoint> marginal_curve(const ScenarioSampler& sampler, std::span<const double> fractions,
                                          std::size_t n_sample, std::uint64_t seed, unsigned workers) {
  if (fractions.size() < 2) fail(ErrorCode::InvalidArgument, "a marginal curve needs at least two fractions");
  if (!std::is_sorted(fractions.begin(), fractions.end()))
    fail(ErrorCode::InvalidArgument, "marginal fractions must be ascending");
  std::vector<MarginalPoint> curve;
  for (double x : fractions) {
    if (!(x >= 0.0 && x <= 1.0)) fail(ErrorCode::InvalidArgument, "marginal fractions must lie in [0, 1]");
    MarginalPoint p;
    p.x = x;
    if (sampler.feasible(x)) {
      const ResampleSummary s = sampler.run(x, n_sample, seed, nullptr, workers);
      p.feasible = true;
      p.metric_mean = s.metric_mean;
      p.metric_std = s.metric_std;
    }
    curve.push_back(p);
  }
  return curve;
}

}  // namespace whim
