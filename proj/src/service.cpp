#include "whim/service.hpp"

#include <httplib.h>

#include <sstream>

#include "whim/analysis.hpp"
#include "whim/backtest.hpp"
#include "whim/error.hpp"

namespace whim {
namespace {

Reply json_reply(int status, const Json& body) { return {status, dump(body), "application/json"}; }

Reply error_reply(int status, std::string_view code, std::string_view message) {
  return json_reply(status, error_json(code, message));
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownColumn:
    case ErrorCode::UnknownValue: return 404;
    case ErrorCode::InvalidArgument:
    case ErrorCode::WrongColumnKind: return 400;
    case ErrorCode::Ingestion:
    case ErrorCode::EmptySelection:
    case ErrorCode::ScenarioInfeasible:
    case ErrorCode::DegenerateDistribution: return 422;
    case ErrorCode::NumericalFailure: return 500;
  }
  return 500;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(path.substr(0, path.find('?')));
  while (std::getline(in, part, '/'))
    if (!part.empty()) parts.push_back(part);
  return parts;
}

nlohmann::json parse_body(const std::string& body) {
  if (body.empty()) return nlohmann::json::object();
  return nlohmann::json::parse(body);
}

}  // namespace

std::string_view job_state_name(JobState state) {
  switch (state) {
    case JobState::Pending: return "pending";
    case JobState::Running: return "running";
    case JobState::Done: return "done";
    case JobState::Failed: return "failed";
  }
  return "pending";
}

std::string SessionRegistry::add_dataset(std::shared_ptr<const Dataset> dataset) {
  std::lock_guard lock(mutex_);
  std::string id = "ds-" + std::to_string(next_dataset_++);
  datasets_.emplace(id, std::move(dataset));
  return id;
}

std::shared_ptr<const Dataset> SessionRegistry::dataset(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = datasets_.find(id);
  return it == datasets_.end() ? nullptr : it->second;
}

std::string SessionRegistry::create_job(std::string kind) {
  std::lock_guard lock(mutex_);
  std::string id = "job-" + std::to_string(next_job_++);
  JobRecord record;
  record.snapshot.id = id;
  record.snapshot.kind = std::move(kind);
  jobs_.emplace(id, std::move(record));
  return id;
}

void SessionRegistry::start_job(const std::string& id) {
  std::lock_guard lock(mutex_);
  auto& job = jobs_.at(id);
  if (job.snapshot.state == JobState::Pending) job.snapshot.state = JobState::Running;
  job.events.push_back(Json{{"status", "running"}}.dump());
}

void SessionRegistry::record_event(const std::string& id, const ProgressEvent& event) {
  std::lock_guard lock(mutex_);
  auto& job = jobs_.at(id);
  job.snapshot.total = event.total;
  if (event.status != "started") ++job.snapshot.completed;
  job.events.push_back(to_json(event).dump());
}

void SessionRegistry::finish_job(const std::string& id, Json result) {
  std::lock_guard lock(mutex_);
  auto& job = jobs_.at(id);
  if (job.snapshot.state == JobState::Done || job.snapshot.state == JobState::Failed) return;
  job.snapshot.state = JobState::Done;
  job.snapshot.result = std::move(result);
  job.events.push_back(Json{{"status", "done"}}.dump());
}

void SessionRegistry::fail_job(const std::string& id, std::string reason) {
  std::lock_guard lock(mutex_);
  auto& job = jobs_.at(id);
  if (job.snapshot.state == JobState::Done || job.snapshot.state == JobState::Failed) return;
  job.snapshot.state = JobState::Failed;
  job.events.push_back(Json{{"status", "failed"}, {"reason", reason}}.dump());
  job.snapshot.failure = std::move(reason);
}

std::optional<JobSnapshot> SessionRegistry::job(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second.snapshot;
}

std::optional<std::string> SessionRegistry::events(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  std::string out;
  for (const auto& line : it->second.events) out += line + "\n";
  return out;
}

WorkerPool::WorkerPool(unsigned workers) {
  for (unsigned i = 0; i < std::max(1u, workers); ++i) threads_.emplace_back([this] { run(); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  for (auto& t : threads_) t.join();
}

void WorkerPool::submit(std::function<void()> task) {
  {
    std::lock_guard lock(mutex_);
    queue_.push_back(std::move(task));
  }
  wake_.notify_one();
}

void WorkerPool::wait_idle() {
  std::unique_lock lock(mutex_);
  idle_.wait(lock, [this] { return queue_.empty() && busy_ == 0; });
}

void WorkerPool::run() {
  for (;;) {
    std::function<void()> task;
    {
      std::unique_lock lock(mutex_);
      wake_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      task = std::move(queue_.front());
      queue_.pop_front();
      ++busy_;
    }
    task();
    {
      std::lock_guard lock(mutex_);
      --busy_;
    }
    idle_.notify_all();
  }
}

Service::Service(ServiceConfig config) : config_(std::move(config)), pool_(config_.job_workers) {
  config_.csv.max_rows = config_.max_rows;
}

Service::~Service() = default;

std::shared_ptr<const Dataset> Service::require_dataset(const std::string& id) const {
  auto ds = registry_.dataset(id);
  if (!ds) throw std::out_of_range("unknown dataset '" + id + "'");
  return ds;
}

Reply Service::handle(const std::string& method, const std::string& path, const std::string& body,
                      const std::string& content_type) {
  const auto parts = split_path(path);
  try {
    if (method == "POST" && parts.size() == 1 && parts[0] == "datasets") {
      if (content_type.find("application/json") != std::string::npos) {
        const auto j = parse_body(body);
        if (!j.contains("csv") || !j.at("csv").is_string())
          return error_reply(400, "invalid_argument", "JSON uploads carry the CSV text in a \"csv\" field");
        return upload(j.at("csv").get<std::string>());
      }
      return upload(body);
    }
    if (parts.size() == 3 && parts[0] == "datasets") {
      const std::string& id = parts[1];
      const std::string& op = parts[2];
      if (method == "GET" && op == "columns") return columns(id);
      if (method == "POST" && op == "whatif") return whatif(id, body);
      if (method == "POST" && op == "margins") return margins(id, body);
      if (method == "POST" && op == "recommendations") return recommendations(id, body);
      if (method == "POST" && op == "backtest") return backtest(id, body);
    }
    if (method == "GET" && parts.size() == 2 && parts[0] == "jobs") return job(parts[1]);
    if (method == "GET" && parts.size() == 3 && parts[0] == "jobs" && parts[2] == "events") return job_events(parts[1]);
    if (method == "GET" && (parts.empty() || (parts.size() == 1 && parts[0] == "health")))
      return json_reply(200, Json{{"status", "ok"}});
    return error_reply(404, "not_found", "no route for " + method + " " + path);
  } catch (const nlohmann::json::parse_error& e) {
    return error_reply(400, "malformed_json", e.what());
  } catch (const nlohmann::json::exception& e) {
    return error_reply(400, "invalid_argument", e.what());
  } catch (const std::out_of_range& e) {
    const bool is_job = parts.size() >= 2 && parts[0] == "jobs";
    return error_reply(404, is_job ? "unknown_job" : "unknown_dataset", e.what());
  } catch (const Error& e) {
    return error_reply(status_for(e.code()), code_name(e.code()), e.what());
  }
}

Reply Service::upload(const std::string& csv_text) {
  if (csv_text.size() > config_.max_upload_bytes)
    return error_reply(413, "payload_too_large", "upload exceeds " + std::to_string(config_.max_upload_bytes) + " bytes");
  auto ds = std::make_shared<const Dataset>(parse_csv(csv_text, config_.csv));
  const std::string id = registry_.add_dataset(ds);
  return json_reply(201, Json{{"dataset_id", id},
                              {"rows", ds->row_count()},
                              {"columns", column_metadata(*ds, false, config_.defaults.n_unique, config_.defaults.n_buckets)}});
}

Reply Service::columns(const std::string& dataset_id) {
  const auto ds = require_dataset(dataset_id);
  return json_reply(200, Json{{"dataset_id", dataset_id},
                              {"rows", ds->row_count()},
                              {"columns", column_metadata(*ds, true, config_.defaults.n_unique, config_.defaults.n_buckets)}});
}

Reply Service::whatif(const std::string& dataset_id, const std::string& body) {
  const auto ds = require_dataset(dataset_id);
  const WhatIfRequest request = whatif_request_from_json(*ds, parse_body(body), config_.defaults);
  return json_reply(200, to_json(run_whatif(*ds, request)));
}

Reply Service::margins(const std::string& dataset_id, const std::string& body) {
  const auto ds = require_dataset(dataset_id);
  const MarginRequest request = margin_request_from_json(*ds, parse_body(body), config_.defaults);
  return json_reply(200, to_json(run_margins(*ds, request)));
}

Reply Service::recommendations(const std::string& dataset_id, const std::string& body) {
  const auto ds = require_dataset(dataset_id);
  EngineConfig cfg = engine_config_from_json(parse_body(body), config_.defaults);
  cfg.validate(*ds);
  const std::string job_id = registry_.create_job("recommendations");
  pool_.submit([this, ds, cfg, job_id] {
    registry_.start_job(job_id);
    try {
      const SweepResult result =
          generate_hypotheses(*ds, cfg, [&](const ProgressEvent& e) { registry_.record_event(job_id, e); });
      registry_.finish_job(job_id, to_json(result));
    } catch (const std::exception& e) {
      registry_.fail_job(job_id, e.what());
    }
  });
  return json_reply(202, Json{{"job_id", job_id}, {"status", "pending"}});
}

Reply Service::backtest(const std::string& dataset_id, const std::string& body) {
  const auto ds = require_dataset(dataset_id);
  const auto j = parse_body(body);
  const bool async = j.value("async", false);
  nlohmann::json fields = j;
  fields.erase("async");
  const BacktestRequest request = backtest_request_from_json(fields, config_.defaults);
  if (!async) return json_reply(200, to_json(whim::backtest(*ds, request)));
  request.objective.validate(*ds);
  const std::string job_id = registry_.create_job("backtest");
  pool_.submit([this, ds, request, job_id] {
    registry_.start_job(job_id);
    try {
      registry_.finish_job(job_id, to_json(whim::backtest(*ds, request)));
    } catch (const std::exception& e) {
      registry_.fail_job(job_id, e.what());
    }
  });
  return json_reply(202, Json{{"job_id", job_id}, {"status", "pending"}});
}

Reply Service::job(const std::string& job_id) {
  const auto snap = registry_.job(job_id);
  if (!snap) return error_reply(404, "unknown_job", "unknown job '" + job_id + "'");
  Json j{{"job_id", snap->id},
         {"kind", snap->kind},
         {"status", job_state_name(snap->state)},
         {"progress", {{"completed", snap->completed}, {"total", snap->total}}}};
  if (snap->state == JobState::Done) j["result"] = *snap->result;
  if (snap->state == JobState::Failed) j["reason"] = snap->failure;
  return json_reply(200, j);
}

Reply Service::job_events(const std::string& job_id) {
  const auto lines = registry_.events(job_id);
  if (!lines) return error_reply(404, "unknown_job", "unknown job '" + job_id + "'");
  return {200, *lines, "application/x-ndjson"};
}

void Service::mount(httplib::Server& server) {
  server.set_payload_max_length(config_.max_upload_bytes);
  const auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    std::string body = req.body;
    std::string content_type = req.get_header_value("Content-Type");
    if (req.is_multipart_form_data() && !req.files.empty()) {
      body = req.has_file("file") ? req.get_file_value("file").content : req.files.begin()->second.content;
      content_type = "text/csv";
    }
    const Reply reply = handle(req.method, req.path, body, content_type);
    res.status = reply.status;
    res.set_content(reply.body, reply.content_type);
  };
  server.Get(R"(/.*)", forward);
  server.Post(R"(/.*)", forward);
}

int serve(const std::string& host, int port, ServiceConfig config) {
  Service service(std::move(config));
  httplib::Server server;
  service.mount(server);
  if (!server.listen(host, port)) return 2;
  return 0;
}

}  // namespace whim
