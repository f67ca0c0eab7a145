#include "whim/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include "whim/analysis.hpp"
#include "whim/backtest.hpp"
#include "whim/error.hpp"
#include "whim/serialize.hpp"
#include "whim/service.hpp"

namespace whim {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string data;
  std::string config;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> metric;
  std::optional<std::string> op;
  std::optional<double> q;
  std::optional<std::string> direction;
  std::optional<std::size_t> n_sample;
  unsigned workers = 1;
  char delimiter = ',';
};

struct WhatIfOptions {
  std::string column;
  std::string value;
  double fraction = 0.0;
  std::optional<std::string> baseline_mode;
  std::optional<double> bandwidth;
  std::string plot_data;
};

struct MarginOptions {
  std::string column;
  std::string value;
  std::vector<double> fractions;
  bool no_optimize = false;
  std::optional<std::size_t> iterations;
};

struct RecommendOptions {
  std::string csv;
  std::vector<std::string> include;
  std::vector<std::string> exclude;
  std::optional<std::size_t> n_unique;
  std::optional<std::size_t> min_support;
  std::optional<std::size_t> iterations;
  bool progress = false;
};

struct BacktestOptions {
  std::string time_column;
  std::string split;
  std::vector<std::string> columns;
  std::optional<std::size_t> n_unique;
  bool table = false;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool needs_data = true) {
  if (needs_data) {
    cmd->add_option("--data", o.data, "CSV file to analyse")->required()->check(CLI::ExistingFile);
    cmd->add_option("--delimiter", o.delimiter, "CSV field delimiter");
  }
  cmd->add_option("--config", o.config, "JSON file of default request fields")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--metric", o.metric, "metric column");
  cmd->add_option("--operator", o.op, "mean | sum | percentile | median | pNN");
  cmd->add_option("--q", o.q, "percentile level in [0, 100]");
  cmd->add_option("--direction", o.direction, "minimize | maximize");
  cmd->add_option("--n-sample", o.n_sample, "resampling draws per evaluation");
  cmd->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--output,-o", o.output, "write JSON here instead of stdout");
}

nlohmann::json read_config(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  try {
    auto j = nlohmann::json::parse(in);
    if (!j.is_object()) throw UsageError("config file '" + path + "' must hold a JSON object");
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("config file '" + path + "': " + e.what());
  }
}

// Config file first, command-line flags on top.
nlohmann::json base_request(const CommonOptions& o) {
  nlohmann::json j = read_config(o.config);
  if (o.seed) j["seed"] = *o.seed;
  if (o.metric) j["metric"] = *o.metric;
  if (o.op) j["operator"] = *o.op;
  if (o.q) j["q"] = *o.q;
  if (o.direction) j["direction"] = *o.direction;
  if (o.n_sample) j["n_sample"] = *o.n_sample;
  if (!j.contains("metric")) throw UsageError("--metric is required");
  return j;
}

Dataset load(const CommonOptions& o) {
  CsvOptions csv;
  csv.delimiter = o.delimiter;
  return load_csv(o.data, csv);
}

EngineConfig defaults_for(const CommonOptions& o) {
  EngineConfig d;
  d.workers = o.workers;
  return d;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
  f << text;
}

void write_plot_data(const ComparisonReport& report, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
  if (report.baseline_density && report.whatif_density) {
    f << "x,baseline_density,whatif_density\n";
    const auto& b = *report.baseline_density;
    const auto& w = *report.whatif_density;
    for (std::size_t i = 0; i < b.grid.size(); ++i)
      f << format_real(b.grid[i]) << ',' << format_real(b.density[i]) << ',' << format_real(w.density[i]) << '\n';
    return;
  }
  const auto& h = report.histograms;
  f << "bin_lower,bin_upper,baseline_count,whatif_count\n";
  for (std::size_t i = 0; i + 1 < h.edges.size(); ++i)
    f << format_real(h.edges[i]) << ',' << format_real(h.edges[i + 1]) << ',' << h.baseline[i] << ',' << h.whatif[i]
      << '\n';
}

int cmd_whatif(const CommonOptions& o, const WhatIfOptions& w, std::ostream& out) {
  nlohmann::json j = base_request(o);
  j["column"] = w.column;
  j["value"] = w.value;
  j["fraction"] = w.fraction;
  if (w.baseline_mode) j["baseline_mode"] = *w.baseline_mode;
  if (w.bandwidth) j["bandwidth_multiplier"] = *w.bandwidth;
  const Dataset ds = load(o);
  const WhatIfResult result = run_whatif(ds, whatif_request_from_json(ds, j, defaults_for(o)));
  if (!w.plot_data.empty()) write_plot_data(result.report, w.plot_data);
  emit(dump(to_json(result)), o.output, out);
  return kExitOk;
}

int cmd_margins(const CommonOptions& o, const MarginOptions& m, std::ostream& out) {
  nlohmann::json j = base_request(o);
  j["column"] = m.column;
  j["value"] = m.value;
  if (!m.fractions.empty()) j["fractions"] = m.fractions;
  if (m.no_optimize) j["optimize"] = false;
  if (m.iterations) j["iterations"] = *m.iterations;
  const Dataset ds = load(o);
  const MarginResult result = run_margins(ds, margin_request_from_json(ds, j, defaults_for(o)));
  emit(dump(to_json(result)), o.output, out);
  return kExitOk;
}

int cmd_recommend(const CommonOptions& o, const RecommendOptions& r, std::ostream& out, std::ostream& err) {
  nlohmann::json j = base_request(o);
  if (!r.include.empty()) j["include"] = r.include;
  if (!r.exclude.empty()) j["exclude"] = r.exclude;
  if (r.n_unique) j["n_unique"] = *r.n_unique;
  if (r.min_support) j["min_support"] = *r.min_support;
  if (r.iterations) j["iterations"] = *r.iterations;
  j["workers"] = o.workers;
  const Dataset ds = load(o);
  const EngineConfig cfg = engine_config_from_json(j);
  ProgressCallback progress;
  if (r.progress)
    progress = [&err](const ProgressEvent& e) {
      err << '[' << e.index + 1 << '/' << e.total << "] " << e.column << '=' << e.label << ' ' << e.status;
      if (!e.detail.empty()) err << " (" << e.detail << ')';
      err << '\n';
    };
  const SweepResult result = generate_hypotheses(ds, cfg, progress);
  if (!r.csv.empty()) {
    std::ofstream f(r.csv, std::ios::binary);
    if (!f) fail(ErrorCode::InvalidArgument, "cannot write '" + r.csv + "'");
    write_recommendations_csv(result, f);
  }
  emit(dump(to_json(result)), o.output, out);
  return kExitOk;
}

int cmd_backtest(const CommonOptions& o, const BacktestOptions& b, std::ostream& out) {
  nlohmann::json j = base_request(o);
  j["time_column"] = b.time_column;
  j["split"] = b.split;
  if (!b.columns.empty()) j["columns"] = b.columns;
  if (b.n_unique) j["n_unique"] = *b.n_unique;
  const Dataset ds = load(o);
  const BacktestReport report = backtest(ds, backtest_request_from_json(j, defaults_for(o)));
  emit(b.table ? format_backtest_table(report) : dump(to_json(report)), o.output, out);
  return kExitOk;
}

unsigned env_workers(unsigned fallback) {
  if (const char* v = std::getenv("WHIM_WORKERS")) {
    char* end = nullptr;
    const unsigned long n = std::strtoul(v, &end, 10);
    if (end != v && *end == '\0' && n > 0) return static_cast<unsigned>(n);
  }
  return fallback;
}

std::pair<std::string, int> split_bind(const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw UsageError("bind address must look like host:port");
  try {
    const int port = std::stoi(bind.substr(colon + 1));
    if (port < 0 || port > 65535) throw std::out_of_range("port");
    return {bind.substr(0, colon), port};
  } catch (const std::logic_error&) {
    throw UsageError("bad port in bind address '" + bind + "'");
  }
}

int cmd_serve(const CommonOptions& o, std::string bind, std::optional<unsigned> jobs, std::ostream& err) {
  if (bind.empty()) {
    const char* env = std::getenv("WHIM_BIND");
    bind = env ? env : "127.0.0.1:8080";
  }
  const auto [host, port] = split_bind(bind);
  ServiceConfig cfg;
  cfg.job_workers = jobs ? *jobs : env_workers(cfg.job_workers);
  nlohmann::json j = read_config(o.config);
  if (o.seed) j["seed"] = *o.seed;
  if (o.n_sample) j["n_sample"] = *o.n_sample;
  if (o.metric) j["metric"] = *o.metric;
  if (o.op) j["operator"] = *o.op;
  if (o.q) j["q"] = *o.q;
  if (o.direction) j["direction"] = *o.direction;
  cfg.defaults = engine_config_from_json(j);
  cfg.defaults.workers = o.workers;
  err << "whim: listening on " << host << ':' << port << '\n';
  if (serve(host, port, cfg) != 0) {
    err << "whim: cannot bind " << host << ':' << port << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return kExitUsage;
    case ErrorCode::NumericalFailure: return kExitNumerical;
    default: return kExitData;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"What-if analysis over tabular data by stratified resampling", "whim"};
  app.require_subcommand(1);

  CommonOptions common;
  WhatIfOptions wopt;
  MarginOptions mopt;
  RecommendOptions ropt;
  BacktestOptions bopt;
  std::string bind;
  std::optional<unsigned> jobs;

  auto* whatif = app.add_subcommand("whatif", "compare one hypothetical scenario with the baseline");
  add_common(whatif, common);
  whatif->add_option("--column", wopt.column, "column to intervene on")->required();
  whatif->add_option("--value", wopt.value, "category, bucket label or value")->required();
  whatif->add_option("--fraction", wopt.fraction, "target fraction in [0, 1]")->required();
  whatif->add_option("--baseline-mode", wopt.baseline_mode, "raw | bootstrap");
  whatif->add_option("--bandwidth", wopt.bandwidth, "KDE bandwidth multiplier");
  whatif->add_option("--plot-data", wopt.plot_data, "write density curves as CSV");

  auto* margins = app.add_subcommand("margins", "metric as a function of the fraction of one value");
  add_common(margins, common);
  margins->add_option("--column", mopt.column, "column to intervene on")->required();
  margins->add_option("--value", mopt.value, "category, bucket label or value")->required();
  margins->add_option("--fractions", mopt.fractions, "fractions to evaluate")->delimiter(',');
  margins->add_flag("--no-optimize", mopt.no_optimize, "skip the Bayesian search for x*");
  margins->add_option("--iterations", mopt.iterations, "evaluation budget of the search");

  auto* recommend = app.add_subcommand("recommend", "sweep every column and rank the interventions");
  add_common(recommend, common);
  recommend->add_option("--csv", ropt.csv, "also write the ranking as CSV");
  recommend->add_option("--include", ropt.include, "columns to sweep")->delimiter(',');
  recommend->add_option("--exclude", ropt.exclude, "columns to skip")->delimiter(',');
  recommend->add_option("--n-unique", ropt.n_unique, "bucket numeric columns above this many values");
  recommend->add_option("--min-support", ropt.min_support, "minimum matching rows per scenario");
  recommend->add_option("--iterations", ropt.iterations, "evaluation budget per scenario");
  recommend->add_flag("--progress", ropt.progress, "report each scenario on stderr");

  auto* bt = app.add_subcommand("backtest", "replay distribution shifts between two time slices");
  add_common(bt, common);
  bt->add_option("--time-column", bopt.time_column, "column that orders the rows")->required();
  bt->add_option("--split", bopt.split, "first value of the later slice")->required();
  bt->add_option("--columns", bopt.columns, "columns to shift")->delimiter(',');
  bt->add_option("--n-unique", bopt.n_unique, "numeric columns with at most this many values are eligible");
  bt->add_flag("--table", bopt.table, "print a text table instead of JSON");

  auto* srv = app.add_subcommand("serve", "run the HTTP JSON service");
  add_common(srv, common, false);
  srv->add_option("--bind", bind, "host:port (default $WHIM_BIND or 127.0.0.1:8080)");
  srv->add_option("--jobs", jobs, "concurrent background jobs (default $WHIM_WORKERS or 2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto& subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  CLI::App* active = app.get_subcommands().front();
  try {
    if (active == whatif) return cmd_whatif(common, wopt, out);
    if (active == margins) return cmd_margins(common, mopt, out);
    if (active == recommend) return cmd_recommend(common, ropt, out, err);
    if (active == bt) return cmd_backtest(common, bopt, out);
    return cmd_serve(common, bind, jobs, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << active->help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "error [" << code_name(e.code()) << "]: " << e.what() << '\n';
    return exit_code_for(e.code());
  }
}

}  // namespace whim
