// Independent reference implementations used by the unit and acceptance
// tests. Nothing here calls into the library's numerical code.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "whim/dataset.hpp"

namespace oracle {

inline long double matern52(long double d, long double ell, long double sf) {
  const long double r = std::sqrt(5.0L) * std::fabs(d) / ell;
  return sf * sf * (1.0L + r + r * r / 3.0L) * std::exp(-r);
}

// Gauss-Jordan inverse with partial pivoting in extended precision.
inline std::vector<std::vector<long double>> invert(std::vector<std::vector<long double>> a) {
  const std::size_t n = a.size();
  std::vector<std::vector<long double>> inv(n, std::vector<long double>(n, 0.0L));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0L;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    if (a[pivot][col] == 0.0L) throw std::runtime_error("singular matrix");
    std::swap(a[pivot], a[col]);
    std::swap(inv[pivot], inv[col]);
    const long double d = a[col][col];
    for (std::size_t c = 0; c < n; ++c) {
      a[col][c] /= d;
      inv[col][c] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const long double f = a[r][col];
      if (f == 0.0L) continue;
      for (std::size_t c = 0; c < n; ++c) {
        a[r][c] -= f * a[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return inv;
}

struct GpPrediction {
  double mean;
  double std;
};

// Textbook posterior: mu = k*' K^-1 y, var = k(x,x) - k*' K^-1 k*.
inline GpPrediction gp_posterior(const std::vector<double>& x, const std::vector<double>& y, double ell, double sf,
                                 const std::vector<double>& diag_noise, double query) {
  const std::size_t n = x.size();
  std::vector<std::vector<long double>> k(n, std::vector<long double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) k[i][j] = matern52(x[i] - x[j], ell, sf) + (i == j ? diag_noise[i] : 0.0L);
  const auto kinv = invert(k);
  std::vector<long double> ks(n);
  for (std::size_t i = 0; i < n; ++i) ks[i] = matern52(query - x[i], ell, sf);
  long double mean = 0.0L, quad = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      mean += ks[i] * kinv[i][j] * y[j];
      quad += ks[i] * kinv[i][j] * ks[j];
    }
  }
  const long double var = static_cast<long double>(sf) * sf - quad;
  return {static_cast<double>(mean), static_cast<double>(std::sqrt(std::max(var, 0.0L)))};
}

// E[max(0, f_best - xi - Y)], Y ~ N(mu, sigma^2), by stratified Monte Carlo:
// one draw per equal-probability stratum of the normal distribution.
inline double expected_improvement_mc(double mu, double sigma, double f_best, double xi, std::size_t draws,
                                      std::uint64_t seed) {
  const boost::math::normal_distribution<double> unit;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  long double total = 0.0L;
  for (std::size_t i = 0; i < draws; ++i) {
    double p = (static_cast<double>(i) + u(rng)) / static_cast<double>(draws);
    p = std::clamp(p, 1e-300, 1.0 - 1e-16);
    const double y = mu + sigma * boost::math::quantile(unit, p);
    total += std::max(0.0, f_best - xi - y);
  }
  return static_cast<double>(total / static_cast<long double>(draws));
}

// sup_t |F_a(t) - F_b(t)| evaluated at every point of the merged sample,
// counting with the same divisions as a two-pointer walk would.
inline double ks_statistic_brute(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pts(a);
  pts.insert(pts.end(), b.begin(), b.end());
  double best = 0.0;
  for (double t : pts) {
    const auto ca = std::count_if(a.begin(), a.end(), [t](double v) { return v <= t; });
    const auto cb = std::count_if(b.begin(), b.end(), [t](double v) { return v <= t; });
    best = std::max(best, std::abs(static_cast<double>(ca) / static_cast<double>(a.size()) -
                                   static_cast<double>(cb) / static_cast<double>(b.size())));
  }
  return best;
}

// Share of label permutations whose KS statistic is at least the observed one.
inline double ks_permutation_p(const std::vector<double>& a, const std::vector<double>& b, std::size_t draws,
                               std::uint64_t seed) {
  const double observed = ks_statistic_brute(a, b);
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t na = a.size(), nb = b.size();
  std::vector<double> sa(na), sb(nb);
  std::mt19937_64 rng(seed);
  std::size_t hits = 0;
  for (std::size_t d = 0; d < draws; ++d) {
    std::shuffle(pooled.begin(), pooled.end(), rng);
    std::copy(pooled.begin(), pooled.begin() + static_cast<std::ptrdiff_t>(na), sa.begin());
    std::copy(pooled.begin() + static_cast<std::ptrdiff_t>(na), pooled.end(), sb.begin());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    std::size_t i = 0, j = 0;
    double dmax = 0.0;
    while (i < na || j < nb) {
      const double t = (j >= nb || (i < na && sa[i] <= sb[j])) ? sa[i] : sb[j];
      while (i < na && sa[i] <= t) ++i;
      while (j < nb && sb[j] <= t) ++j;
      dmax = std::max(dmax, std::abs(static_cast<double>(i) / static_cast<double>(na) -
                                     static_cast<double>(j) / static_cast<double>(nb)));
    }
    if (dmax >= observed - 1e-12) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(draws);
}

// Pearson chi-square goodness-of-fit p-value against equal cell probabilities.
inline double chi_square_uniform_p(const std::vector<std::uint64_t>& counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  const double expected = total / static_cast<double>(counts.size());
  double stat = 0.0;
  for (auto c : counts) stat += (static_cast<double>(c) - expected) * (static_cast<double>(c) - expected) / expected;
  const boost::math::chi_squared_distribution<double> dist(static_cast<double>(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846); }

// Direct double-loop KDE with optional per-value weights.
inline double kde_at(double g, const std::vector<double>& xs, double h) {
  long double s = 0.0L;
  for (double x : xs) s += normal_pdf((g - x) / h);
  return static_cast<double>(s / (static_cast<long double>(xs.size()) * h));
}

// Type-7 quantile on a copy.
inline double quantile7(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double sample_std(const std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace oracle

namespace fixtures {

inline std::vector<std::optional<std::string>> cells(const std::vector<std::string>& text) {
  return {text.begin(), text.end()};
}

inline whim::Column text_column(std::string name, const std::vector<std::string>& text) {
  return whim::Column::categorical_from_text(std::move(name), cells(text));
}

// One categorical signal column whose value "v" adds `shift` to the metric,
// plus `noise_columns` independent categorical columns.
inline whim::Dataset planted_signal(std::size_t rows, double shift, std::size_t noise_columns, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution signal(0.3);
  std::uniform_int_distribution<int> level(0, 3);
  std::normal_distribution<double> noise(100.0, 10.0);
  std::vector<std::string> sig(rows);
  std::vector<std::vector<std::string>> others(noise_columns, std::vector<std::string>(rows));
  std::vector<double> metric(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const bool on = signal(rng);
    sig[i] = on ? "v" : "w";
    for (auto& col : others) col[i] = std::string(1, static_cast<char>('a' + level(rng)));
    metric[i] = noise(rng) + (on ? shift : 0.0);
  }
  std::vector<whim::Column> cols;
  cols.push_back(text_column("signal", sig));
  for (std::size_t c = 0; c < noise_columns; ++c)
    cols.push_back(text_column("noise" + std::to_string(c + 1), others[c]));
  cols.push_back(whim::Column::numeric("metric", metric));
  return whim::Dataset(std::move(cols));
}

// Indicator dataset: column c is "u" on the first `matching` rows, metric is
// `hi` there and `lo` elsewhere.
inline whim::Dataset indicator(std::size_t rows, std::size_t matching, double hi = 100.0, double lo = 0.0) {
  std::vector<std::string> c(rows);
  std::vector<double> m(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    c[i] = i < matching ? "u" : "o";
    m[i] = i < matching ? hi : lo;
  }
  return whim::Dataset({text_column("c", c), whim::Column::numeric("m", m)});
}

}  // namespace fixtures
