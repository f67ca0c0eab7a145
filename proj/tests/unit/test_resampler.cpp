#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "oracles.hpp"
#include "whim/error.hpp"
#include "whim/resampler.hpp"

using namespace whim;

namespace {

const ValueSelector kU = ValueSelector::category("u");

std::size_t count_matching(const ResampleDraw& d, std::size_t matching_rows) {
  return static_cast<std::size_t>(
      std::count_if(d.row_indices.begin(), d.row_indices.end(), [&](std::size_t r) { return r < matching_rows; }));
}

}  // namespace

TEST_CASE("target_count rounds half up") {
  CHECK(target_count(0.5, 10) == 5);
  CHECK(target_count(0.25, 10) == 3);
  CHECK(target_count(0.0, 10) == 0);
  CHECK(target_count(1.0, 10) == 10);
  CHECK(target_count(0.05, 10) == 1);
  CHECK(target_count(0.3, 1000) == 300);
}

TEST_CASE("resample: N=10 with 3 matching rows at x=0.5 draws exactly 5 of each") {
  const Dataset ds = fixtures::indicator(10, 3);
  const ResampleDraw d = resample_with_fraction(ds, {"c", kU, 0.5}, 42);
  CHECK(d.row_indices.size() == 10);
  CHECK(d.matching_count == 5);
  CHECK(count_matching(d, 3) == 5);
}

TEST_CASE("resample: x=0 draws only non-matching rows") {
  const Dataset ds = fixtures::indicator(10, 3);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ResampleDraw d = resample_with_fraction(ds, {"c", kU, 0.0}, seed);
    CHECK(d.row_indices.size() == 10);
    CHECK(count_matching(d, 3) == 0);
  }
}

TEST_CASE("resample: identity fraction keeps stratum sizes") {
  const Dataset ds = fixtures::indicator(37, 11);
  const double x = current_fraction(ds, "c", kU);
  const ResampleDraw d = resample_with_fraction(ds, {"c", kU, x}, 9);
  CHECK(count_matching(d, 11) == 11);
}

TEST_CASE("resample: fraction exactness for every x on a grid") {
  const Dataset ds = fixtures::indicator(101, 40);
  for (int i = 0; i <= 100; ++i) {
    const double x = i / 100.0;
    const ResampleDraw d = resample_with_fraction(ds, {"c", kU, x}, static_cast<std::uint64_t>(i));
    CHECK(count_matching(d, 40) == static_cast<std::size_t>(std::floor(x * 101 + 0.5)));
  }
}

TEST_CASE("resample: infeasible scenarios") {
  const Dataset all_u = fixtures::indicator(5, 5);
  CHECK_THROWS_AS(resample_with_fraction(all_u, {"c", kU, 0.5}, 1), Error);
  CHECK_NOTHROW(resample_with_fraction(all_u, {"c", kU, 1.0}, 1));
  const Dataset ds = fixtures::indicator(10, 3);
  CHECK_THROWS_AS(resample_with_fraction(ds, {"c", ValueSelector::category("zzz"), 0.5}, 1), Error);
  CHECK_NOTHROW(resample_with_fraction(ds, {"c", ValueSelector::category("zzz"), 0.0}, 1));
  CHECK_THROWS_AS(resample_with_fraction(ds, {"c", kU, 1.5}, 1), Error);
}

TEST_CASE("resample: rows within a stratum are equally likely") {
  const Dataset ds = fixtures::indicator(20, 8);
  std::vector<std::uint64_t> hits(20, 0);
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const ResampleDraw d = resample_with_fraction(ds, {"c", kU, 0.35}, s * 7919 + 1);
    for (auto r : d.row_indices) ++hits[r];
  }
  const std::vector<std::uint64_t> inside(hits.begin(), hits.begin() + 8);
  const std::vector<std::uint64_t> outside(hits.begin() + 8, hits.end());
  CHECK(oracle::chi_square_uniform_p(inside) > 0.001);
  CHECK(oracle::chi_square_uniform_p(outside) > 0.001);
}

TEST_CASE("uniform_index is unbiased for a non power of two") {
  std::mt19937_64 rng(123);
  std::vector<std::uint64_t> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[uniform_index(rng, 7)];
  CHECK(oracle::chi_square_uniform_p(counts) > 0.001);
}

TEST_CASE("seeds: derivation separates scenarios, draws and masters") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t master : {0ull, 1ull})
    for (const char* label : {"a", "b"})
      for (std::size_t target : {3u, 4u})
        for (std::uint64_t i = 0; i < 5; ++i) seen.insert(derive_seed(master, "col", ValueSelector::category(label), target, i));
  CHECK(seen.size() == 40);
  CHECK(derive_seed(5, "col", kU, 3, 2) == derive_seed(5, "col", kU, 3, 2));
  CHECK(derive_seed(5, "col", ValueSelector::category("(missing)"), 3, 2) !=
        derive_seed(5, "col", ValueSelector::missing(), 3, 2));
  CHECK(mix_seed(1, "a") != mix_seed(1, "b"));
}

TEST_CASE("repeated_resample: a single draw has zero std") {
  const Dataset ds = fixtures::indicator(50, 20);
  const ResampleSummary s = repeated_resample(ds, {"c", kU, 0.4}, ObjectiveSpec{"m"}, 1, 3);
  REQUIRE(s.per_draw.size() == 1);
  CHECK(s.metric_std == 0.0);
  CHECK(s.metric_mean == s.per_draw[0]);
}

TEST_CASE("repeated_resample: constant metric is unchanged by any scenario") {
  const Dataset ds = fixtures::indicator(40, 10, 7.0, 7.0);
  for (std::size_t n : {1u, 2u, 30u}) {
    for (double x : {0.0, 0.3, 1.0}) {
      const ResampleSummary s = repeated_resample(ds, {"c", kU, x}, ObjectiveSpec{"m"}, n, 11);
      CHECK(s.metric_mean == 7.0);
      CHECK(s.metric_std == 0.0);
    }
  }
}

TEST_CASE("repeated_resample: indicator metric has expectation 100x") {
  const Dataset ds = fixtures::indicator(5000, 1500);
  const ResampleSummary s = repeated_resample(ds, {"c", kU, 0.4}, ObjectiveSpec{"m"}, 30, 17);
  // The matching count is fixed at round(xN), so every draw's mean is exactly 100 * 2000 / 5000.
  CHECK(s.metric_mean == doctest::Approx(40.0).epsilon(1e-12));
}

TEST_CASE("repeated_resample: mixed metric mean within three binomial standard errors") {
  // Metric is 100 on matching rows half of the time, so the draw mean varies.
  std::vector<std::string> c(4000);
  std::vector<double> m(4000);
  for (std::size_t i = 0; i < c.size(); ++i) {
    c[i] = i < 1000 ? "u" : "o";
    m[i] = (i < 1000 && i % 2 == 0) ? 100.0 : 0.0;
  }
  const Dataset ds({fixtures::text_column("c", c), Column::numeric("m", m)});
  const std::size_t n_sample = 200;
  const ResampleSummary s = repeated_resample(ds, {"c", kU, 0.4}, ObjectiveSpec{"m"}, n_sample, 5);
  const double expected = 100.0 * 0.4 * 0.5;
  // 1600 matching picks per draw, each a Bernoulli(0.5) of 100 / 4000.
  const double per_draw_se = 100.0 * std::sqrt(1600 * 0.25) / 4000.0;
  CHECK(std::abs(s.metric_mean - expected) <= 3.0 * per_draw_se / std::sqrt(double(n_sample)));
  CHECK(s.metric_std == doctest::Approx(per_draw_se).epsilon(0.2));
}

TEST_CASE("repeated_resample: deterministic and independent of worker count") {
  const Dataset ds = fixtures::planted_signal(300, 50, 2, 9);
  const Scenario sc{"signal", ValueSelector::category("v"), 0.1};
  const ResampleSummary a = repeated_resample(ds, sc, ObjectiveSpec{"metric"}, 25, 77, 1);
  const ResampleSummary b = repeated_resample(ds, sc, ObjectiveSpec{"metric"}, 25, 77, 4);
  const ResampleSummary c = repeated_resample(ds, sc, ObjectiveSpec{"metric"}, 25, 78, 1);
  CHECK(a.per_draw == b.per_draw);
  CHECK(a.per_draw != c.per_draw);
}

TEST_CASE("repeated_resample: planted data gives an increasing affine expectation") {
  const Dataset ds = fixtures::indicator(200, 60, 10.0, 2.0);
  double prev = -1.0;
  for (int i = 0; i <= 10; ++i) {
    const double x = i / 10.0;
    const ResampleSummary s = repeated_resample(ds, {"c", kU, x}, ObjectiveSpec{"m"}, 3, 1);
    CHECK(s.metric_mean == doctest::Approx(2.0 + 8.0 * target_count(x, 200) / 200.0));
    CHECK(s.metric_mean > prev);
    prev = s.metric_mean;
  }
}

TEST_CASE("ScenarioSampler: row hits count every drawn row") {
  const Dataset ds = fixtures::indicator(30, 10);
  ScenarioSampler sampler(ds, "c", kU, ObjectiveSpec{"m"});
  std::vector<std::uint32_t> hits;
  const ResampleSummary s = sampler.run(0.2, 12, 4, &hits);
  REQUIRE(hits.size() == 30);
  CHECK(std::accumulate(hits.begin(), hits.end(), 0u) == 12u * 30u);
  CHECK(std::accumulate(hits.begin(), hits.begin() + 10, 0u) == 12u * 6u);
  CHECK(s.per_draw.size() == 12);
}

TEST_CASE("bootstrap_baseline: equal-size draws with their own seed stream") {
  const Dataset ds = fixtures::planted_signal(120, 50, 1, 3);
  std::vector<std::uint32_t> hits;
  const ResampleSummary a = bootstrap_baseline(ds, ObjectiveSpec{"metric"}, 10, 5, &hits);
  CHECK(std::accumulate(hits.begin(), hits.end(), 0u) == 1200u);
  const ResampleSummary b = bootstrap_baseline(ds, ObjectiveSpec{"metric"}, 10, 5);
  CHECK(a.per_draw == b.per_draw);
  const double raw = eval_metric(ds, ObjectiveSpec{"metric"});
  CHECK(std::abs(a.metric_mean - raw) < 4.0 * a.metric_std);
}
