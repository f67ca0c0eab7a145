#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace whim {

/// A sample stored as ascending distinct values with multiplicities. Pooled
/// bootstrap draws are kept this way instead of being materialized.
class EmpiricalSample {
 public:
  EmpiricalSample() = default;

  /// NaNs are skipped.
  static EmpiricalSample from_values(std::span<const double> values);
  /// values[i] occurs counts[i] times; NaNs and zero counts are skipped.
  static EmpiricalSample from_counts(std::span<const double> values, std::span<const std::uint64_t> counts);
  static EmpiricalSample merge(const EmpiricalSample& a, const EmpiricalSample& b);

  std::span<const double> values() const noexcept { return values_; }
  std::span<const std::uint64_t> counts() const noexcept { return counts_; }
  std::uint64_t size() const noexcept { return total_; }
  bool empty() const noexcept { return total_ == 0; }

  double min() const;
  double max() const;
  double mean() const;
  /// n-1 convention; 0 when size() < 2.
  double stddev() const;
  /// Linear-interpolation quantile of the expanded sample, p in [0, 1].
  double quantile(double p) const;
  /// Number of observations <= x.
  std::uint64_t count_at_most(double x) const;

 private:
  double order_statistic(std::uint64_t index) const;

  std::vector<double> values_;
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint64_t> cumulative_;
  std::uint64_t total_ = 0;
};

struct SummaryStats {
  std::uint64_t count = 0;
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double max = 0.0;
  double p5 = 0.0;
  double p25 = 0.0;
  double p50 = 0.0;
  double p75 = 0.0;
  double p95 = 0.0;
};

SummaryStats summarize(const EmpiricalSample& sample);

/// 0.9 * min(s, IQR/1.34) * n^(-1/5), falling back to s when IQR is 0.
/// Throws DegenerateDistribution for constant samples or n < 2.
double silverman_bandwidth(std::span<const double> sample);
double silverman_bandwidth(const EmpiricalSample& sample);

struct DensityCurve {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;
};

inline constexpr std::size_t kDefaultGridPoints = 256;

/// Gaussian KDE over [min - 3h, max + 3h] with the Silverman bandwidth times
/// bandwidth_multiplier.
DensityCurve kde(std::span<const double> sample, std::size_t grid_points = kDefaultGridPoints,
                 double bandwidth_multiplier = 1.0);
DensityCurve kde(const EmpiricalSample& sample, std::size_t grid_points = kDefaultGridPoints,
                 double bandwidth_multiplier = 1.0);
/// Gaussian KDE with a given bandwidth on an evenly spaced grid [lo, hi].
DensityCurve kde_on_grid(const EmpiricalSample& sample, double bandwidth, double lo, double hi,
                         std::size_t grid_points);

/// Trapezoidal integral of a density curve.
double trapezoid_mass(const DensityCurve& curve);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Asymptotic two-sided Kolmogorov survival function at sqrt(n_e) * D.
double kolmogorov_p_value(double effective_n, double statistic);

/// Two-sample KS test. Throws EmptySelection on an empty sample.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);
KsResult ks_two_sample(const EmpiricalSample& a, const EmpiricalSample& b);

struct SharedHistogram {
  std::vector<double> edges;
  std::vector<std::uint64_t> baseline;
  std::vector<std::uint64_t> whatif;
};

/// Freedman-Diaconis bins on the pooled data, clamped to [min_bins, max_bins].
SharedHistogram shared_histogram(const EmpiricalSample& baseline, const EmpiricalSample& whatif,
                                 std::size_t min_bins = 10, std::size_t max_bins = 100);

struct CompareOptions {
  double alpha = 0.05;
  double bandwidth_multiplier = 1.0;
  std::size_t grid_points = kDefaultGridPoints;
};

/// Grid point where the two densities differ most, plus a view window
/// around it.
struct DensityDeviation {
  double x = 0.0;
  double baseline_density = 0.0;
  double whatif_density = 0.0;
  double window_lower = 0.0;
  double window_upper = 0.0;
};

struct ComparisonReport {
  SummaryStats baseline_stats;
  SummaryStats whatif_stats;
  double baseline_metric = 0.0;
  double whatif_metric = 0.0;
  double potential_gain = 0.0;  // whatif_metric - baseline_metric
  double ks_statistic = 0.0;
  double ks_p_value = 1.0;
  double alpha = 0.05;
  bool significant = false;
  SharedHistogram histograms;
  bool baseline_degenerate = false;
  bool whatif_degenerate = false;
  std::optional<DensityCurve> baseline_density;
  std::optional<DensityCurve> whatif_density;
  std::optional<DensityDeviation> largest_deviation;
};

/// Baseline vs. what-if comparison. The metric values are P(m) of each side,
/// supplied by the caller because pooled draws do not determine them for
/// every operator (sum, for one).
ComparisonReport compare(const EmpiricalSample& baseline, const EmpiricalSample& whatif, double baseline_metric,
                         double whatif_metric, const CompareOptions& options = {});

}  // namespace whim
