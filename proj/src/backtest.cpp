#include "whim/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>

#include "whim/error.hpp"
#include "whim/parallel.hpp"
#include "whim/selection.hpp"

namespace whim {
namespace {

struct Split {
  std::vector<std::size_t> before;
  std::vector<std::size_t> after;
};

Split split_rows(const Dataset& dataset, const BacktestRequest& request) {
  const Column& time = dataset.column(request.time_column);
  Split s;
  if (time.is_numeric()) {
    const auto boundary = parse_real(request.split);
    if (!boundary)
      fail(ErrorCode::InvalidArgument, "time column '" + time.name() + "' is numeric but split '" + request.split +
                                           "' is not a number, so rows cannot be ordered against it");
    const auto values = time.numeric_values();
    for (std::size_t r = 0; r < dataset.row_count(); ++r) {
      if (std::isnan(values[r])) continue;
      (values[r] < *boundary ? s.before : s.after).push_back(r);
    }
  } else {
    const auto codes = time.codes();
    const auto labels = time.labels();
    for (std::size_t r = 0; r < dataset.row_count(); ++r) {
      if (codes[r] < 0) continue;
      (labels[static_cast<std::size_t>(codes[r])] < request.split ? s.before : s.after).push_back(r);
    }
  }
  if (s.before.empty()) fail(ErrorCode::EmptySelection, "no rows before split '" + request.split + "'");
  if (s.after.empty()) fail(ErrorCode::EmptySelection, "no rows at or after split '" + request.split + "'");
  return s;
}

std::vector<std::string> eligible_columns(const Dataset& dataset, const BacktestRequest& request) {
  if (!request.columns.empty()) {
    for (const auto& c : request.columns) dataset.column(c);
    return request.columns;
  }
  std::vector<std::string> out;
  for (const Column& c : dataset.columns()) {
    if (c.name() == request.time_column || c.name() == request.objective.metric_column) continue;
    if (c.is_numeric() && c.unique_count() > request.n_unique) continue;
    out.push_back(c.name());
  }
  return out;
}

struct Job {
  std::string column;
  ValueSelector value;
};

}  // namespace

BacktestReport backtest(const Dataset& dataset, const BacktestRequest& request) {
  request.objective.validate(dataset);
  if (request.n_sample < 1) fail(ErrorCode::InvalidArgument, "n_sample must be at least 1");
  const Split split = split_rows(dataset, request);
  const Dataset slice_a = dataset.take(split.before);
  const Dataset slice_b = dataset.take(split.after);
  const double actual = eval_metric(slice_b, request.objective);

  BacktestReport report;
  report.time_column = request.time_column;
  report.split = request.split;
  report.rows_a = split.before.size();
  report.rows_b = split.after.size();

  std::vector<std::size_t> ordered_rows(split.before);
  ordered_rows.insert(ordered_rows.end(), split.after.begin(), split.after.end());
  const Dataset both = dataset.take(ordered_rows);

  std::vector<Job> jobs;
  for (const std::string& name : eligible_columns(dataset, request)) {
    const Column& c = dataset.column(name);
    if (c.is_numeric() && c.unique_count() > request.n_unique) {
      report.skipped.push_back({name, {}, "too_many_values: bucket or recode numeric columns before backtesting"});
      continue;
    }
    for (ValueSelector& v : column_domain(both, name, request.n_unique, 2)) jobs.push_back({name, std::move(v)});
  }

  std::vector<std::optional<BacktestRow>> rows(jobs.size());
  std::vector<std::optional<SkippedScenario>> skipped(jobs.size());
  parallel_for(jobs.size(), request.workers, [&](std::size_t i) {
    const Job& job = jobs[i];
    try {
      const ScenarioSampler sampler(slice_a, job.column, job.value, request.objective);
      BacktestRow row;
      row.column = job.column;
      row.value = job.value.label;
      row.fraction_a = sampler.current_fraction();
      row.fraction_b = current_fraction(slice_b, job.column, job.value);
      if (!sampler.feasible(row.fraction_b)) {
        skipped[i] = SkippedScenario{job.column, job.value.label,
                                     "scenario_infeasible: slice A cannot reproduce the slice B fraction"};
        return;
      }
      const ResampleSummary s = sampler.run(row.fraction_b, request.n_sample, request.seed);
      row.simulated_metric = s.metric_mean;
      row.simulated_std = s.metric_std;
      row.actual_metric = actual;
      const double diff = std::abs(s.metric_mean - actual);
      row.relative = std::abs(actual) > 0.0;
      row.absolute_error = row.relative ? diff / std::abs(actual) : diff;
      rows[i] = std::move(row);
    } catch (const Error& e) {
      skipped[i] = SkippedScenario{job.column, job.value.label, std::string(code_name(e.code())) + ": " + e.what()};
    }
  });

  for (auto& r : rows)
    if (r) report.rows.push_back(std::move(*r));
  for (auto& s : skipped)
    if (s) report.skipped.push_back(std::move(*s));
  std::sort(report.rows.begin(), report.rows.end(), [](const BacktestRow& a, const BacktestRow& b) {
    return a.column != b.column ? a.column < b.column : a.value < b.value;
  });
  if (report.rows.empty()) fail(ErrorCode::EmptySelection, "no column value could be backtested");

  double sum = 0.0;
  for (const auto& r : report.rows) sum += r.absolute_error;
  const auto n = static_cast<double>(report.rows.size());
  report.mae = sum / n;
  if (report.rows.size() > 1) {
    double ss = 0.0;
    for (const auto& r : report.rows) ss += (r.absolute_error - report.mae) * (r.absolute_error - report.mae);
    report.mae_std = std::sqrt(ss / (n - 1.0));
  }
  return report;
}

std::string format_backtest_table(const BacktestReport& report) {
  std::string out;
  char line[512];
  std::snprintf(line, sizeof line, "Backtest on %s: %zu rows before %s, %zu rows from %s on\n",
                report.time_column.c_str(), report.rows_a, report.split.c_str(), report.rows_b, report.split.c_str());
  out += line;
  std::snprintf(line, sizeof line, "%-20s %-20s %9s %9s %12s %12s %9s\n", "column", "value", "frac_a", "frac_b",
                "simulated", "actual", "error");
  out += line;
  for (const auto& r : report.rows) {
    std::snprintf(line, sizeof line, "%-20.20s %-20.20s %9.4f %9.4f %12.4g %12.4g %9.4f\n", r.column.c_str(),
                  r.value.c_str(), r.fraction_a, r.fraction_b, r.simulated_metric, r.actual_metric, r.absolute_error);
    out += line;
  }
  std::snprintf(line, sizeof line, "MAE (+- std): %.4f (%.4f) over %zu values, %zu skipped\n", report.mae,
                report.mae_std, report.rows.size(), report.skipped.size());
  out += line;
  return out;
}

}  // namespace whim
