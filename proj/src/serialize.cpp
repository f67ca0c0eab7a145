#include "whim/serialize.hpp"

#include <ostream>
#include <set>

#include "whim/selection.hpp"

namespace whim {
namespace {

std::string_view selector_kind(ValueSelector::Kind kind) {
  switch (kind) {
    case ValueSelector::Kind::Category: return "category";
    case ValueSelector::Kind::Range: return "range";
    case ValueSelector::Kind::Missing: return "missing";
  }
  return "category";
}

Json counts_json(const std::vector<std::uint64_t>& counts) {
  Json a = Json::array();
  for (auto c : counts) a.push_back(c);
  return a;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

}  // namespace

Json to_json(const ValueSelector& value) {
  Json j;
  j["kind"] = selector_kind(value.kind);
  j["label"] = value.label;
  if (value.kind == ValueSelector::Kind::Range) {
    j["lower"] = value.range.lower;
    j["upper"] = value.range.upper;
    j["upper_inclusive"] = value.range.upper_inclusive;
  }
  return j;
}

Json to_json(const SummaryStats& s) {
  return Json{{"count", s.count}, {"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"max", s.max},
              {"p5", s.p5},       {"p25", s.p25},   {"p50", s.p50}, {"p75", s.p75}, {"p95", s.p95}};
}

Json to_json(const DensityCurve& curve) {
  return Json{{"bandwidth", curve.bandwidth}, {"grid", curve.grid}, {"density", curve.density}};
}

Json to_json(const ComparisonReport& r) {
  Json j;
  j["baseline_stats"] = to_json(r.baseline_stats);
  j["whatif_stats"] = to_json(r.whatif_stats);
  j["baseline_metric"] = r.baseline_metric;
  j["whatif_metric"] = r.whatif_metric;
  j["potential_gain"] = r.potential_gain;
  j["ks_statistic"] = r.ks_statistic;
  j["ks_p_value"] = r.ks_p_value;
  j["alpha"] = r.alpha;
  j["significant"] = r.significant;
  j["histograms"] = Json{{"edges", r.histograms.edges},
                         {"baseline", counts_json(r.histograms.baseline)},
                         {"whatif", counts_json(r.histograms.whatif)}};
  j["densities"] = Json{{"baseline", r.baseline_density ? to_json(*r.baseline_density) : Json()},
                        {"whatif", r.whatif_density ? to_json(*r.whatif_density) : Json()}};
  j["degenerate"] = Json{{"baseline", r.baseline_degenerate}, {"whatif", r.whatif_degenerate}};
  if (r.largest_deviation) {
    const auto& d = *r.largest_deviation;
    j["largest_deviation"] = Json{{"x", d.x},
                                  {"baseline_density", d.baseline_density},
                                  {"whatif_density", d.whatif_density},
                                  {"window", {d.window_lower, d.window_upper}}};
  } else {
    j["largest_deviation"] = nullptr;
  }
  return j;
}

Json to_json(const ObjectiveSpec& o) {
  Json j{{"metric", o.metric_column}, {"operator", aggregation_name(o.op)}};
  if (o.op == Aggregation::Percentile) j["q"] = o.q;
  j["direction"] = direction_name(o.direction);
  return j;
}

Json to_json(const WhatIfResult& r) {
  Json j;
  j["scenario"] = Json{{"column", r.scenario.column}, {"value", to_json(r.scenario.value)},
                       {"fraction", r.scenario.fraction}};
  j["current_fraction"] = r.current_fraction;
  j["matching_rows_per_draw"] = r.matching_rows;
  j["n_sample"] = r.whatif.per_draw.size();
  j["whatif_draws"] = Json{{"metric_mean", r.whatif.metric_mean},
                           {"metric_std", r.whatif.metric_std},
                           {"per_draw", r.whatif.per_draw}};
  if (r.baseline_draws) {
    j["baseline_mode"] = "bootstrap";
    j["baseline_draws"] = Json{{"metric_mean", r.baseline_draws->metric_mean},
                               {"metric_std", r.baseline_draws->metric_std},
                               {"per_draw", r.baseline_draws->per_draw}};
  } else {
    j["baseline_mode"] = "raw";
  }
  j["report"] = to_json(r.report);
  return j;
}

Json to_json(const OptimizationResult& r) {
  Json trace = Json::array();
  for (const auto& t : r.trace) trace.push_back({{"x", t.x}, {"metric_mean", t.metric_mean}, {"metric_std", t.metric_std}});
  return Json{{"x_star", r.x_star}, {"f_star", r.f_star}, {"iterations", r.iterations}, {"trace", trace},
              {"infeasible", r.infeasible}};
}

Json to_json(const MarginResult& r) {
  Json curve = Json::array();
  for (const auto& p : r.curve) {
    if (p.feasible)
      curve.push_back({{"x", p.x}, {"feasible", true}, {"metric_mean", p.metric_mean}, {"metric_std", p.metric_std}});
    else
      curve.push_back({{"x", p.x}, {"feasible", false}, {"metric_mean", nullptr}, {"metric_std", nullptr}});
  }
  Json j{{"column", r.column}, {"value", to_json(r.value)}, {"current_fraction", r.current_fraction}, {"curve", curve}};
  j["optimum"] = r.optimum ? to_json(*r.optimum) : Json();
  return j;
}

Json to_json(const Recommendation& rec) {
  return Json{{"rank", rec.rank},
              {"column", rec.column},
              {"value", to_json(rec.value)},
              {"current_fraction", rec.current_fraction},
              {"fraction", rec.fraction},
              {"action", rec.fraction < rec.current_fraction ? "reduce" : rec.fraction > rec.current_fraction ? "increase" : "keep"},
              {"baseline_metric", rec.baseline_metric},
              {"projected_metric", rec.projected_metric},
              {"projected_std", rec.projected_std},
              {"absolute_change", rec.absolute_change()},
              {"impact", rec.impact},
              {"ks_statistic", rec.ks_statistic},
              {"ks_p_value", rec.ks_p_value},
              {"significant", rec.significant},
              {"evaluations", rec.evaluations},
              {"per_draw", rec.per_draw}};
}

Json to_json(const SweepResult& r) {
  Json recs = Json::array();
  for (const auto& rec : r.recommendations) recs.push_back(to_json(rec));
  const auto skipped_json = [](const std::vector<SkippedScenario>& list) {
    Json a = Json::array();
    for (const auto& s : list) a.push_back({{"column", s.column}, {"value", s.label}, {"reason", s.reason}});
    return a;
  };
  return Json{{"baseline_metric", r.baseline_metric},
              {"enumerated", r.enumerated},
              {"attempted", r.attempted},
              {"skipped_count", r.skipped.size()},
              {"recommendations", recs},
              {"skipped", skipped_json(r.skipped)},
              {"skipped_columns", skipped_json(r.skipped_columns)}};
}

Json to_json(const BacktestReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"column", row.column},
                    {"value", row.value},
                    {"fraction_a", row.fraction_a},
                    {"fraction_b", row.fraction_b},
                    {"simulated_metric", row.simulated_metric},
                    {"simulated_std", row.simulated_std},
                    {"actual_metric", row.actual_metric},
                    {"absolute_error", row.absolute_error},
                    {"relative", row.relative}});
  Json skipped = Json::array();
  for (const auto& s : r.skipped) skipped.push_back({{"column", s.column}, {"value", s.label}, {"reason", s.reason}});
  return Json{{"time_column", r.time_column}, {"split", r.split}, {"rows_a", r.rows_a}, {"rows_b", r.rows_b},
              {"mae", r.mae},                 {"mae_std", r.mae_std}, {"results", rows}, {"skipped", skipped}};
}

Json to_json(const ProgressEvent& e) {
  Json j{{"index", e.index}, {"total", e.total}, {"scenario_id", e.column + "=" + e.label},
         {"column", e.column}, {"value", e.label}, {"status", e.status}};
  if (!e.detail.empty()) j["detail"] = e.detail;
  return j;
}

Json column_metadata(const Dataset& dataset, bool with_values, std::size_t n_unique, std::size_t n_buckets) {
  Json cols = Json::array();
  for (const Column& c : dataset.columns()) {
    Json j{{"name", c.name()}, {"kind", kind_name(c.kind())}, {"n_unique", c.unique_count()},
           {"missing", c.missing_count()}};
    if (with_values) {
      Json values = Json::array();
      if (c.unique_count() > 0 || c.missing_count() > 0) {
        for (const auto& v : column_domain(dataset, c.name(), n_unique, n_buckets)) {
          Json entry = to_json(v);
          entry["current_fraction"] = current_fraction(dataset, c.name(), v);
          values.push_back(std::move(entry));
        }
      }
      j["values"] = std::move(values);
    }
    cols.push_back(std::move(j));
  }
  return cols;
}

Json error_json(std::string_view code, std::string_view message) {
  return Json{{"error", {{"code", code}, {"message", message}}}};
}

ObjectiveSpec objective_from_json(const nlohmann::json& j, ObjectiveSpec o) {
  read_if(j, "metric", o.metric_column);
  if (j.contains("q")) o.q = j.at("q").get<double>();
  if (j.contains("operator")) {
    double q = o.q;
    o.op = parse_aggregation(j.at("operator").get<std::string>(), &q);
    o.q = q;
  }
  if (j.contains("direction")) o.direction = parse_direction(j.at("direction").get<std::string>());
  return o;
}

EngineConfig engine_config_from_json(const nlohmann::json& j, EngineConfig c) {
  if (!j.is_object()) fail(ErrorCode::InvalidArgument, "config must be a JSON object");
  static const std::set<std::string> known{"metric",      "operator", "q",       "direction", "n_sample",
                                           "n_unique",    "n_buckets", "min_support", "iterations", "init_points",
                                           "xi",          "seed",     "include", "exclude",   "alpha",
                                           "workers"};
  for (const auto& item : j.items())
    if (!known.count(item.key())) fail(ErrorCode::InvalidArgument, "unknown config key '" + item.key() + "'");
  try {
    c.objective = objective_from_json(j, c.objective);
    read_if(j, "n_sample", c.n_sample);
    read_if(j, "n_unique", c.n_unique);
    read_if(j, "n_buckets", c.n_buckets);
    read_if(j, "min_support", c.min_support);
    read_if(j, "iterations", c.iterations);
    read_if(j, "init_points", c.init_points);
    read_if(j, "xi", c.xi);
    read_if(j, "seed", c.master_seed);
    read_if(j, "include", c.include_columns);
    read_if(j, "exclude", c.exclude_columns);
    read_if(j, "alpha", c.alpha);
    read_if(j, "workers", c.workers);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("bad config value: ") + e.what());
  }
  return c;
}

namespace {

const nlohmann::json& require_key(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorCode::InvalidArgument, std::string("missing field '") + key + "'");
  return j.at(key);
}

std::string text_of(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return format_real(v.get<double>());
  fail(ErrorCode::InvalidArgument, "expected a string or number, got " + v.dump());
}

}  // namespace

WhatIfRequest whatif_request_from_json(const Dataset& dataset, const nlohmann::json& j, const EngineConfig& defaults) {
  WhatIfRequest r;
  try {
    const std::string column = require_key(j, "column").get<std::string>();
    std::size_t n_unique = defaults.n_unique;
    std::size_t n_buckets = defaults.n_buckets;
    read_if(j, "n_unique", n_unique);
    read_if(j, "n_buckets", n_buckets);
    r.objective = objective_from_json(j, defaults.objective);
    r.objective.validate(dataset);
    r.scenario.column = column;
    r.scenario.value = resolve_value(dataset, column, text_of(require_key(j, "value")), n_unique, n_buckets);
    r.scenario.fraction = require_key(j, "fraction").get<double>();
    if (!(r.scenario.fraction >= 0.0 && r.scenario.fraction <= 1.0))
      fail(ErrorCode::InvalidArgument, "fraction must lie in [0, 1]");
    r.n_sample = defaults.n_sample;
    r.seed = defaults.master_seed;
    r.compare.alpha = defaults.alpha;
    r.workers = defaults.workers;
    read_if(j, "n_sample", r.n_sample);
    read_if(j, "seed", r.seed);
    read_if(j, "alpha", r.compare.alpha);
    read_if(j, "bandwidth_multiplier", r.compare.bandwidth_multiplier);
    if (j.contains("baseline_mode")) r.baseline_mode = parse_baseline_mode(j.at("baseline_mode").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("bad request field: ") + e.what());
  }
  return r;
}

MarginRequest margin_request_from_json(const Dataset& dataset, const nlohmann::json& j, const EngineConfig& defaults) {
  MarginRequest r;
  try {
    r.column = require_key(j, "column").get<std::string>();
    std::size_t n_unique = defaults.n_unique;
    std::size_t n_buckets = defaults.n_buckets;
    read_if(j, "n_unique", n_unique);
    read_if(j, "n_buckets", n_buckets);
    r.objective = objective_from_json(j, defaults.objective);
    r.objective.validate(dataset);
    r.value = resolve_value(dataset, r.column, text_of(require_key(j, "value")), n_unique, n_buckets);
    r.n_sample = defaults.n_sample;
    r.seed = defaults.master_seed;
    r.workers = defaults.workers;
    r.bo = defaults.bo_config();
    read_if(j, "fractions", r.fractions);
    read_if(j, "n_sample", r.n_sample);
    read_if(j, "seed", r.seed);
    read_if(j, "optimize", r.optimize);
    read_if(j, "iterations", r.bo.iterations);
    read_if(j, "init_points", r.bo.init_points);
    read_if(j, "xi", r.bo.xi);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("bad request field: ") + e.what());
  }
  return r;
}

BacktestRequest backtest_request_from_json(const nlohmann::json& j, const EngineConfig& defaults) {
  BacktestRequest r;
  try {
    r.time_column = require_key(j, "time_column").get<std::string>();
    r.split = text_of(require_key(j, "split"));
    r.objective = objective_from_json(j, defaults.objective);
    r.n_sample = defaults.n_sample;
    r.seed = defaults.master_seed;
    r.n_unique = defaults.n_unique;
    r.workers = defaults.workers;
    read_if(j, "columns", r.columns);
    read_if(j, "n_sample", r.n_sample);
    read_if(j, "seed", r.seed);
    read_if(j, "n_unique", r.n_unique);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("bad request field: ") + e.what());
  }
  return r;
}

void write_recommendations_csv(const SweepResult& result, std::ostream& out) {
  out << "rank,column,value,current_fraction,fraction,baseline_metric,projected_metric,projected_std,impact,"
         "ks_p_value,significant\n";
  for (const auto& r : result.recommendations) {
    out << r.rank << ',' << csv_field(r.column) << ',' << csv_field(r.value.label) << ','
        << format_real(r.current_fraction) << ',' << format_real(r.fraction) << ',' << format_real(r.baseline_metric)
        << ',' << format_real(r.projected_metric) << ',' << format_real(r.projected_std) << ','
        << format_real(r.impact) << ',' << format_real(r.ks_p_value) << ',' << (r.significant ? "true" : "false")
        << '\n';
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace whim
