#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "whim/dataset.hpp"
#include "whim/objective.hpp"
#include "whim/selection.hpp"

namespace whim {

inline constexpr std::size_t kDefaultSampleCount = 30;

/// One hypothetical reality: `value` of `column` occurs in a `fraction` of rows.
struct Scenario {
  std::string column;
  ValueSelector value;
  double fraction = 0.0;
};

struct ResampleDraw {
  std::vector<std::size_t> row_indices;  // matching rows first, then complement
  std::uint64_t seed = 0;
  std::size_t matching_count = 0;
};

struct ResampleSummary {
  double metric_mean = 0.0;
  double metric_std = 0.0;  // sample std over draws; 0 for a single draw
  std::vector<double> per_draw;
};

/// round(fraction * n) with ties rounded up.
std::size_t target_count(double fraction, std::size_t n);

bool is_feasible(const RowPartition& partition, double fraction);

/// Sub-seed for draw `index` of a scenario. Depends only on its arguments,
/// so draws can be generated in any order. Scenarios that request the same
/// matching-row count share seeds.
std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view column, const ValueSelector& value,
                          std::size_t target, std::uint64_t index);

/// Mixes extra context (e.g. a purpose tag) into a seed.
std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag);

/// Unbiased integer in [0, n).
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n);

/// Stratified bootstrap: round(x*N) rows with replacement from the matching
/// stratum, the rest from the complement. Throws ScenarioInfeasible.
ResampleDraw resample_with_fraction(const RowPartition& partition, double fraction, std::uint64_t seed);
ResampleDraw resample_with_fraction(const Dataset& dataset, const Scenario& scenario, std::uint64_t seed);

/// Evaluates one (column, value) scenario family at arbitrary fractions.
/// Holds a reference to the dataset, which must outlive the sampler.
class ScenarioSampler {
 public:
  ScenarioSampler(const Dataset& dataset, std::string column, ValueSelector value, ObjectiveSpec objective);

  const Dataset& dataset() const noexcept { return *dataset_; }
  const std::string& column() const noexcept { return column_; }
  const ValueSelector& value() const noexcept { return value_; }
  const ObjectiveSpec& objective() const noexcept { return objective_; }
  const RowPartition& partition() const noexcept { return partition_; }
  double current_fraction() const noexcept;
  bool feasible(double fraction) const { return is_feasible(partition_, fraction); }

  double draw_metric(double fraction, std::uint64_t seed, std::vector<std::uint32_t>* row_hits = nullptr) const;

  /// n_sample draws; when row_hits is given it receives, per source row, how
  /// often it was drawn across all draws.
  ResampleSummary run(double fraction, std::size_t n_sample, std::uint64_t master_seed,
                      std::vector<std::uint32_t>* row_hits = nullptr, unsigned workers = 1) const;

 private:
  const Dataset* dataset_;
  std::string column_;
  ValueSelector value_;
  ObjectiveSpec objective_;
  RowPartition partition_;
  std::span<const double> metric_;
};

ResampleSummary repeated_resample(const Dataset& dataset, const Scenario& scenario, const ObjectiveSpec& objective,
                                  std::size_t n_sample, std::uint64_t master_seed, unsigned workers = 1);

/// Metric of an equal-size plain bootstrap of the whole dataset, used when
/// the baseline is itself resampled.
ResampleSummary bootstrap_baseline(const Dataset& dataset, const ObjectiveSpec& objective, std::size_t n_sample,
                                   std::uint64_t master_seed, std::vector<std::uint32_t>* row_hits = nullptr);

}  // namespace whim
