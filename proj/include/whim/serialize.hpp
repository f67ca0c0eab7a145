#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "whim/analysis.hpp"
#include "whim/backtest.hpp"
#include "whim/dataset.hpp"
#include "whim/engine.hpp"
#include "whim/error.hpp"
#include "whim/stats.hpp"

namespace whim {

using Json = nlohmann::ordered_json;

Json to_json(const ValueSelector& value);
Json to_json(const SummaryStats& stats);
Json to_json(const DensityCurve& curve);
Json to_json(const ComparisonReport& report);
Json to_json(const WhatIfResult& result);
Json to_json(const OptimizationResult& result);
Json to_json(const MarginResult& result);
Json to_json(const Recommendation& rec);
Json to_json(const SweepResult& result);
Json to_json(const BacktestReport& report);
Json to_json(const ProgressEvent& event);
Json to_json(const ObjectiveSpec& objective);

/// {"name", "kind", "n_unique", "missing"} per column; with values=true also
/// the sweep domain (labels or bucket labels) and current fractions.
Json column_metadata(const Dataset& dataset, bool with_values, std::size_t n_unique, std::size_t n_buckets);

Json error_json(std::string_view code, std::string_view message);

/// Reads objective fields ("metric", "operator", "q", "direction") over
/// the given defaults.
ObjectiveSpec objective_from_json(const nlohmann::json& j, ObjectiveSpec defaults = {});
/// Reads EngineConfig fields over the given defaults. Unknown keys are
/// rejected so typos do not silently fall back to defaults.
EngineConfig engine_config_from_json(const nlohmann::json& j, EngineConfig defaults = {});

/// Request decoding shared by the CLI and the HTTP service. Missing keys
/// fall back to `defaults`; required keys raise InvalidArgument.
WhatIfRequest whatif_request_from_json(const Dataset& dataset, const nlohmann::json& j, const EngineConfig& defaults);
MarginRequest margin_request_from_json(const Dataset& dataset, const nlohmann::json& j, const EngineConfig& defaults);
BacktestRequest backtest_request_from_json(const nlohmann::json& j, const EngineConfig& defaults);

/// One row per recommendation, ranked.
void write_recommendations_csv(const SweepResult& result, std::ostream& out);

/// Stable text form used by the CLI and the service.
std::string dump(const Json& j);

}  // namespace whim
