#include "whim/resampler.hpp"

#include <bit>
#include <cmath>
#include <numeric>

#include "whim/error.hpp"
#include "whim/parallel.hpp"

namespace whim {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

template <typename Visit>
void draw_rows(const RowPartition& p, std::size_t k, std::mt19937_64& rng, Visit&& visit) {
  const std::size_t n = p.total();
  for (std::size_t i = 0; i < k; ++i) visit(p.matching[uniform_index(rng, p.matching.size())]);
  for (std::size_t i = k; i < n; ++i) visit(p.complement[uniform_index(rng, p.complement.size())]);
}

void require_feasible(const RowPartition& p, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    fail(ErrorCode::InvalidArgument, "fraction must lie in [0, 1]");
  if (!is_feasible(p, fraction)) {
    const std::size_t k = target_count(fraction, p.total());
    fail(ErrorCode::ScenarioInfeasible,
         k > 0 && p.matching.empty() ? "no rows match the scenario value, so a fraction above 0 cannot be drawn"
                                     : "every row matches the scenario value, so a fraction below 1 cannot be drawn");
  }
}

double summarize_draw_metric(std::span<const double> metric, const RowPartition& p, std::size_t k,
                             std::mt19937_64& rng, const ObjectiveSpec& objective,
                             std::vector<std::uint32_t>* row_hits) {
  if (objective.op == Aggregation::Percentile) {
    std::vector<double> values;
    values.reserve(p.total());
    draw_rows(p, k, rng, [&](std::size_t r) {
      if (row_hits) ++(*row_hits)[r];
      if (!std::isnan(metric[r])) values.push_back(metric[r]);
    });
    return aggregate(values, objective);
  }
  double sum = 0.0;
  std::size_t count = 0;
  draw_rows(p, k, rng, [&](std::size_t r) {
    if (row_hits) ++(*row_hits)[r];
    const double v = metric[r];
    if (!std::isnan(v)) {
      sum += v;
      ++count;
    }
  });
  if (count == 0) fail(ErrorCode::EmptySelection, "every drawn row has a missing metric value");
  return objective.op == Aggregation::Sum ? sum : sum / static_cast<double>(count);
}

ResampleSummary summarize(std::vector<double> per_draw) {
  ResampleSummary s;
  const auto n = static_cast<double>(per_draw.size());
  s.metric_mean = std::accumulate(per_draw.begin(), per_draw.end(), 0.0) / n;
  if (per_draw.size() > 1) {
    double ss = 0.0;
    for (double v : per_draw) ss += (v - s.metric_mean) * (v - s.metric_mean);
    s.metric_std = std::sqrt(ss / (n - 1.0));
  }
  s.per_draw = std::move(per_draw);
  return s;
}

}  // namespace

std::size_t target_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5));
}

bool is_feasible(const RowPartition& partition, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) return false;
  const std::size_t n = partition.total();
  const std::size_t k = target_count(fraction, n);
  return !(k > 0 && partition.matching.empty()) && !(k < n && partition.complement.empty());
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view column, const ValueSelector& value,
                          std::size_t target, std::uint64_t index) {
  std::uint64_t h = splitmix64(master_seed);
  h = splitmix64(h ^ fnv1a(column));
  h = splitmix64(h ^ fnv1a(value.label, 0x84222325cbf29ce4ull + static_cast<std::uint64_t>(value.kind)));
  h = splitmix64(h ^ static_cast<std::uint64_t>(target));
  return splitmix64(h ^ index);
}

std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag) { return splitmix64(seed ^ fnv1a(tag)); }

std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
  // Lemire's multiply-and-reject.
  unsigned __int128 m = static_cast<unsigned __int128>(rng()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(rng()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

ResampleDraw resample_with_fraction(const RowPartition& partition, double fraction, std::uint64_t seed) {
  require_feasible(partition, fraction);
  ResampleDraw draw;
  draw.seed = seed;
  draw.matching_count = target_count(fraction, partition.total());
  draw.row_indices.reserve(partition.total());
  std::mt19937_64 rng(seed);
  draw_rows(partition, draw.matching_count, rng, [&](std::size_t r) { draw.row_indices.push_back(r); });
  return draw;
}

ResampleDraw resample_with_fraction(const Dataset& dataset, const Scenario& scenario, std::uint64_t seed) {
  return resample_with_fraction(partition_rows(dataset, scenario.column, scenario.value), scenario.fraction, seed);
}

ScenarioSampler::ScenarioSampler(const Dataset& dataset, std::string column, ValueSelector value,
                                 ObjectiveSpec objective)
    : dataset_(&dataset),
      column_(std::move(column)),
      value_(std::move(value)),
      objective_(std::move(objective)) {
  objective_.validate(dataset);
  partition_ = partition_rows(dataset, column_, value_);
  metric_ = dataset.column(objective_.metric_column).numeric_values();
}

double ScenarioSampler::current_fraction() const noexcept {
  return static_cast<double>(partition_.matching.size()) / static_cast<double>(partition_.total());
}

double ScenarioSampler::draw_metric(double fraction, std::uint64_t seed, std::vector<std::uint32_t>* row_hits) const {
  require_feasible(partition_, fraction);
  std::mt19937_64 rng(seed);
  return summarize_draw_metric(metric_, partition_, target_count(fraction, partition_.total()), rng, objective_,
                               row_hits);
}

ResampleSummary ScenarioSampler::run(double fraction, std::size_t n_sample, std::uint64_t master_seed,
                                     std::vector<std::uint32_t>* row_hits, unsigned workers) const {
  if (n_sample < 1) fail(ErrorCode::InvalidArgument, "n_sample must be at least 1");
  require_feasible(partition_, fraction);
  const std::size_t k = target_count(fraction, partition_.total());
  std::vector<double> per_draw(n_sample);
  if (row_hits) row_hits->assign(partition_.total(), 0);
  if (row_hits || workers <= 1) {
    for (std::size_t i = 0; i < n_sample; ++i)
      per_draw[i] = draw_metric(fraction, derive_seed(master_seed, column_, value_, k, i), row_hits);
  } else {
    parallel_for(n_sample, workers, [&](std::size_t i) {
      per_draw[i] = draw_metric(fraction, derive_seed(master_seed, column_, value_, k, i));
    });
  }
  return summarize(std::move(per_draw));
}

ResampleSummary repeated_resample(const Dataset& dataset, const Scenario& scenario, const ObjectiveSpec& objective,
                                  std::size_t n_sample, std::uint64_t master_seed, unsigned workers) {
  const ScenarioSampler sampler(dataset, scenario.column, scenario.value, objective);
  return sampler.run(scenario.fraction, n_sample, master_seed, nullptr, workers);
}

ResampleSummary bootstrap_baseline(const Dataset& dataset, const ObjectiveSpec& objective, std::size_t n_sample,
                                   std::uint64_t master_seed, std::vector<std::uint32_t>* row_hits) {
  if (n_sample < 1) fail(ErrorCode::InvalidArgument, "n_sample must be at least 1");
  objective.validate(dataset);
  RowPartition all;
  all.matching.resize(dataset.row_count());
  std::iota(all.matching.begin(), all.matching.end(), std::size_t{0});
  const auto metric = dataset.column(objective.metric_column).numeric_values();
  if (row_hits) row_hits->assign(dataset.row_count(), 0);
  const std::uint64_t base = mix_seed(master_seed, "baseline-bootstrap");
  std::vector<double> per_draw(n_sample);
  for (std::size_t i = 0; i < n_sample; ++i) {
    std::mt19937_64 rng(splitmix64(base ^ i));
    per_draw[i] = summarize_draw_metric(metric, all, all.matching.size(), rng, objective, row_hits);
  }
  return summarize(std::move(per_draw));
}

}  // namespace whim
