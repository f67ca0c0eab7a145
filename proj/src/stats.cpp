#include "whim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "whim/error.hpp"

namespace whim {
namespace {

// Beyond 38 bandwidths the Gaussian kernel underflows double precision.
constexpr double kKernelCutoff = 38.0;

bool is_degenerate(const EmpiricalSample& s) { return s.size() < 2 || s.min() == s.max(); }

}  // namespace

EmpiricalSample EmpiricalSample::from_values(std::span<const double> values) {
  std::vector<double> sorted;
  sorted.reserve(values.size());
  for (double v : values)
    if (!std::isnan(v)) sorted.push_back(v);
  std::sort(sorted.begin(), sorted.end());
  EmpiricalSample s;
  for (double v : sorted) {
    if (!s.values_.empty() && s.values_.back() == v) {
      ++s.counts_.back();
    } else {
      s.values_.push_back(v);
      s.counts_.push_back(1);
    }
  }
  std::uint64_t running = 0;
  for (std::uint64_t c : s.counts_) s.cumulative_.push_back(running += c);
  s.total_ = running;
  return s;
}

EmpiricalSample EmpiricalSample::from_counts(std::span<const double> values, std::span<const std::uint64_t> counts) {
  if (values.size() != counts.size()) fail(ErrorCode::InvalidArgument, "values and counts differ in length");
  std::vector<std::pair<double, std::uint64_t>> pairs;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (counts[i] > 0 && !std::isnan(values[i])) pairs.emplace_back(values[i], counts[i]);
  std::sort(pairs.begin(), pairs.end());
  EmpiricalSample s;
  for (const auto& [v, c] : pairs) {
    if (!s.values_.empty() && s.values_.back() == v) {
      s.counts_.back() += c;
    } else {
      s.values_.push_back(v);
      s.counts_.push_back(c);
    }
  }
  std::uint64_t running = 0;
  for (std::uint64_t c : s.counts_) s.cumulative_.push_back(running += c);
  s.total_ = running;
  return s;
}

EmpiricalSample EmpiricalSample::merge(const EmpiricalSample& a, const EmpiricalSample& b) {
  std::vector<double> values(a.values_);
  values.insert(values.end(), b.values_.begin(), b.values_.end());
  std::vector<std::uint64_t> counts(a.counts_);
  counts.insert(counts.end(), b.counts_.begin(), b.counts_.end());
  return from_counts(values, counts);
}

double EmpiricalSample::min() const {
  if (empty()) fail(ErrorCode::EmptySelection, "empty sample");
  return values_.front();
}

double EmpiricalSample::max() const {
  if (empty()) fail(ErrorCode::EmptySelection, "empty sample");
  return values_.back();
}

double EmpiricalSample::mean() const {
  if (empty()) fail(ErrorCode::EmptySelection, "empty sample");
  double sum = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) sum += values_[i] * static_cast<double>(counts_[i]);
  return sum / static_cast<double>(total_);
}

double EmpiricalSample::stddev() const {
  if (total_ < 2) return 0.0;
  const double m = mean();
  double ss = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double d = values_[i] - m;
    ss += d * d * static_cast<double>(counts_[i]);
  }
  return std::sqrt(ss / static_cast<double>(total_ - 1));
}

double EmpiricalSample::order_statistic(std::uint64_t index) const {
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), index);
  return values_[static_cast<std::size_t>(it - cumulative_.begin())];
}

double EmpiricalSample::quantile(double p) const {
  if (empty()) fail(ErrorCode::EmptySelection, "quantile of an empty sample");
  const double h = static_cast<double>(total_ - 1) * p;
  const auto lo = static_cast<std::uint64_t>(std::floor(h));
  if (lo + 1 >= total_) return values_.back();
  const double a = order_statistic(lo);
  const double b = order_statistic(lo + 1);
  return a + (h - static_cast<double>(lo)) * (b - a);
}

std::uint64_t EmpiricalSample::count_at_most(double x) const {
  const auto it = std::upper_bound(values_.begin(), values_.end(), x);
  if (it == values_.begin()) return 0;
  return cumulative_[static_cast<std::size_t>(it - values_.begin()) - 1];
}

SummaryStats summarize(const EmpiricalSample& sample) {
  SummaryStats s;
  s.count = sample.size();
  s.mean = sample.mean();
  s.std = sample.stddev();
  s.min = sample.min();
  s.max = sample.max();
  s.p5 = sample.quantile(0.05);
  s.p25 = sample.quantile(0.25);
  s.p50 = sample.quantile(0.50);
  s.p75 = sample.quantile(0.75);
  s.p95 = sample.quantile(0.95);
  return s;
}

double silverman_bandwidth(const EmpiricalSample& sample) {
  if (sample.size() < 2) fail(ErrorCode::DegenerateDistribution, "bandwidth needs at least two observations");
  const double s = sample.stddev();
  if (!(s > 0.0)) fail(ErrorCode::DegenerateDistribution, "sample is constant");
  const double iqr = sample.quantile(0.75) - sample.quantile(0.25);
  const double spread = iqr > 0.0 ? std::min(s, iqr / 1.34) : s;
  return 0.9 * spread * std::pow(static_cast<double>(sample.size()), -0.2);
}

double silverman_bandwidth(std::span<const double> sample) {
  return silverman_bandwidth(EmpiricalSample::from_values(sample));
}

DensityCurve kde_on_grid(const EmpiricalSample& sample, double bandwidth, double lo, double hi,
                         std::size_t grid_points) {
  if (sample.empty()) fail(ErrorCode::EmptySelection, "density of an empty sample");
  if (!(bandwidth > 0.0)) fail(ErrorCode::InvalidArgument, "bandwidth must be positive");
  if (grid_points < 2) fail(ErrorCode::InvalidArgument, "grid needs at least two points");
  DensityCurve curve;
  curve.bandwidth = bandwidth;
  curve.grid.resize(grid_points);
  curve.density.resize(grid_points);
  const auto values = sample.values();
  const auto counts = sample.counts();
  const double norm = 1.0 / (static_cast<double>(sample.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
  const double step = (hi - lo) / static_cast<double>(grid_points - 1);
  for (std::size_t g = 0; g < grid_points; ++g) {
    const double x = g + 1 == grid_points ? hi : lo + step * static_cast<double>(g);
    const auto first = std::lower_bound(values.begin(), values.end(), x - kKernelCutoff * bandwidth);
    const auto last = std::upper_bound(first, values.end(), x + kKernelCutoff * bandwidth);
    double sum = 0.0;
    for (auto it = first; it != last; ++it) {
      const double z = (x - *it) / bandwidth;
      sum += static_cast<double>(counts[static_cast<std::size_t>(it - values.begin())]) * std::exp(-0.5 * z * z);
    }
    curve.grid[g] = x;
    curve.density[g] = sum * norm;
  }
  return curve;
}

DensityCurve kde(const EmpiricalSample& sample, std::size_t grid_points, double bandwidth_multiplier) {
  if (!(bandwidth_multiplier > 0.0)) fail(ErrorCode::InvalidArgument, "bandwidth multiplier must be positive");
  const double h = silverman_bandwidth(sample) * bandwidth_multiplier;
  return kde_on_grid(sample, h, sample.min() - 3.0 * h, sample.max() + 3.0 * h, grid_points);
}

DensityCurve kde(std::span<const double> sample, std::size_t grid_points, double bandwidth_multiplier) {
  return kde(EmpiricalSample::from_values(sample), grid_points, bandwidth_multiplier);
}

double trapezoid_mass(const DensityCurve& curve) {
  double mass = 0.0;
  for (std::size_t i = 1; i < curve.grid.size(); ++i)
    mass += 0.5 * (curve.density[i] + curve.density[i - 1]) * (curve.grid[i] - curve.grid[i - 1]);
  return mass;
}

double kolmogorov_p_value(double effective_n, double statistic) {
  const double lambda = std::sqrt(effective_n) * statistic;
  if (!(lambda > 0.0)) return 1.0;
  double p = 0.0;
  if (lambda < 1.18) {
    // Same distribution through the Jacobi theta identity; the alternating
    // series converges too slowly for small lambda.
    const double c = -std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int k = 1; k < 1000; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = std::exp(c * odd * odd);
      sum += term;
      if (term < 1e-10) break;
    }
    p = 1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum;
  } else {
    double sign = 1.0;
    for (int k = 1; k < 1000; ++k) {
      const double term = std::exp(-2.0 * k * k * lambda * lambda);
      p += sign * term;
      if (term < 1e-10) break;
      sign = -sign;
    }
    p *= 2.0;
  }
  return std::clamp(p, 0.0, 1.0);
}

KsResult ks_two_sample(const EmpiricalSample& a, const EmpiricalSample& b) {
  if (a.empty() || b.empty()) fail(ErrorCode::EmptySelection, "KS test needs two non-empty samples");
  const auto av = a.values();
  const auto ac = a.counts();
  const auto bv = b.values();
  const auto bc = b.counts();
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  std::uint64_t cum_a = 0;
  std::uint64_t cum_b = 0;
  double d = 0.0;
  while (i < av.size() || j < bv.size()) {
    const double t = j == bv.size() || (i < av.size() && av[i] <= bv[j]) ? av[i] : bv[j];
    if (i < av.size() && av[i] == t) cum_a += ac[i++];
    if (j < bv.size() && bv[j] == t) cum_b += bc[j++];
    d = std::max(d, std::abs(static_cast<double>(cum_a) / na - static_cast<double>(cum_b) / nb));
  }
  return {d, kolmogorov_p_value(na * nb / (na + nb), d)};
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  return ks_two_sample(EmpiricalSample::from_values(a), EmpiricalSample::from_values(b));
}

SharedHistogram shared_histogram(const EmpiricalSample& baseline, const EmpiricalSample& whatif,
                                 std::size_t min_bins, std::size_t max_bins) {
  const EmpiricalSample pooled = EmpiricalSample::merge(baseline, whatif);
  if (pooled.empty()) fail(ErrorCode::EmptySelection, "histogram of empty samples");
  double lo = pooled.min();
  double hi = pooled.max();
  std::size_t bins = min_bins;
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  } else {
    const double width = 2.0 * (pooled.quantile(0.75) - pooled.quantile(0.25)) /
                         std::cbrt(static_cast<double>(pooled.size()));
    if (width > 0.0)
      bins = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil((hi - lo) / width)), min_bins, max_bins);
  }
  SharedHistogram h;
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i < bins; ++i)
    h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  h.edges[bins] = hi;
  const auto fill = [&](const EmpiricalSample& s, std::vector<std::uint64_t>& counts) {
    counts.assign(bins, 0);
    for (std::size_t i = 0; i < s.values().size(); ++i) {
      const auto it = std::upper_bound(h.edges.begin(), h.edges.end(), s.values()[i]);
      const auto bin = std::clamp<std::ptrdiff_t>(it - h.edges.begin() - 1, 0, static_cast<std::ptrdiff_t>(bins) - 1);
      counts[static_cast<std::size_t>(bin)] += s.counts()[i];
    }
  };
  fill(baseline, h.baseline);
  fill(whatif, h.whatif);
  return h;
}

ComparisonReport compare(const EmpiricalSample& baseline, const EmpiricalSample& whatif, double baseline_metric,
                         double whatif_metric, const CompareOptions& options) {
  if (baseline.empty() || whatif.empty()) fail(ErrorCode::EmptySelection, "comparison needs two non-empty samples");
  if (!(options.bandwidth_multiplier > 0.0)) fail(ErrorCode::InvalidArgument, "bandwidth multiplier must be positive");
  ComparisonReport r;
  r.baseline_stats = summarize(baseline);
  r.whatif_stats = summarize(whatif);
  r.baseline_metric = baseline_metric;
  r.whatif_metric = whatif_metric;
  r.potential_gain = whatif_metric - baseline_metric;
  const KsResult ks = ks_two_sample(baseline, whatif);
  r.ks_statistic = ks.statistic;
  r.ks_p_value = ks.p_value;
  r.alpha = options.alpha;
  r.significant = ks.p_value < options.alpha;
  r.histograms = shared_histogram(baseline, whatif);
  r.baseline_degenerate = is_degenerate(baseline);
  r.whatif_degenerate = is_degenerate(whatif);

  std::optional<double> hb;
  std::optional<double> hw;
  if (!r.baseline_degenerate) hb = silverman_bandwidth(baseline) * options.bandwidth_multiplier;
  if (!r.whatif_degenerate) hw = silverman_bandwidth(whatif) * options.bandwidth_multiplier;
  if (!hb && !hw) return r;

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  if (hb) {
    lo = std::min(lo, baseline.min() - 3.0 * *hb);
    hi = std::max(hi, baseline.max() + 3.0 * *hb);
  }
  if (hw) {
    lo = std::min(lo, whatif.min() - 3.0 * *hw);
    hi = std::max(hi, whatif.max() + 3.0 * *hw);
  }
  if (hb) r.baseline_density = kde_on_grid(baseline, *hb, lo, hi, options.grid_points);
  if (hw) r.whatif_density = kde_on_grid(whatif, *hw, lo, hi, options.grid_points);
  if (hb && hw) {
    std::size_t best = 0;
    double best_gap = -1.0;
    for (std::size_t g = 0; g < options.grid_points; ++g) {
      const double gap = std::abs(r.whatif_density->density[g] - r.baseline_density->density[g]);
      if (gap > best_gap) {
        best_gap = gap;
        best = g;
      }
    }
    const double half = 3.0 * std::max(*hb, *hw);
    const double x = r.baseline_density->grid[best];
    r.largest_deviation = DensityDeviation{x, r.baseline_density->density[best], r.whatif_density->density[best],
                                           std::max(lo, x - half), std::min(hi, x + half)};
  }
  return r;
}

}  // namespace whim
