#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "whim/dataset.hpp"
#include "whim/engine.hpp"
#include "whim/serialize.hpp"

namespace httplib {
class Server;
}

namespace whim {

struct ServiceConfig {
  std::size_t max_upload_bytes = 100u * 1024u * 1024u;
  std::size_t max_rows = 5'000'000;
  unsigned job_workers = 2;
  EngineConfig defaults;  // objective fields are ignored; requests name their metric
  CsvOptions csv;
};

enum class JobState { Pending, Running, Done, Failed };

std::string_view job_state_name(JobState state);

struct JobSnapshot {
  std::string id;
  std::string kind;
  JobState state = JobState::Pending;
  std::size_t completed = 0;
  std::size_t total = 0;
  std::optional<Json> result;
  std::string failure;
};

/// Thread-safe store of uploaded datasets and asynchronous jobs. Job state
/// only moves forward: pending -> running -> done | failed.
class SessionRegistry {
 public:
  std::string add_dataset(std::shared_ptr<const Dataset> dataset);
  /// nullptr when the id is unknown.
  std::shared_ptr<const Dataset> dataset(const std::string& id) const;

  std::string create_job(std::string kind);
  void start_job(const std::string& id);
  void record_event(const std::string& id, const ProgressEvent& event);
  void finish_job(const std::string& id, Json result);
  void fail_job(const std::string& id, std::string reason);

  std::optional<JobSnapshot> job(const std::string& id) const;
  /// Line-delimited JSON of every event recorded so far.
  std::optional<std::string> events(const std::string& id) const;

 private:
  struct JobRecord {
    JobSnapshot snapshot;
    std::vector<std::string> events;
  };

  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const Dataset>> datasets_;
  std::map<std::string, JobRecord> jobs_;
  std::size_t next_dataset_ = 1;
  std::size_t next_job_ = 1;
};

/// Fixed-size pool running queued tasks in FIFO order.
class WorkerPool {
 public:
  explicit WorkerPool(unsigned workers);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  void submit(std::function<void()> task);
  /// Blocks until the queue is empty and no task is running.
  void wait_idle();

 private:
  void run();

  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable idle_;
  std::deque<std::function<void()>> queue_;
  std::vector<std::thread> threads_;
  std::size_t busy_ = 0;
  bool stopping_ = false;
};

struct Reply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// HTTP JSON front end over the engine.
class Service {
 public:
  explicit Service(ServiceConfig config = {});
  ~Service();

  /// Routes one request. Paths and bodies follow the published API.
  Reply handle(const std::string& method, const std::string& path, const std::string& body,
               const std::string& content_type = "application/json");

  /// Registers every route on an httplib server.
  void mount(httplib::Server& server);

  SessionRegistry& registry() noexcept { return registry_; }
  void wait_for_jobs() { pool_.wait_idle(); }

 private:
  Reply upload(const std::string& csv_text);
  Reply columns(const std::string& dataset_id);
  Reply whatif(const std::string& dataset_id, const std::string& body);
  Reply margins(const std::string& dataset_id, const std::string& body);
  Reply recommendations(const std::string& dataset_id, const std::string& body);
  Reply backtest(const std::string& dataset_id, const std::string& body);
  Reply job(const std::string& job_id);
  Reply job_events(const std::string& job_id);

  std::shared_ptr<const Dataset> require_dataset(const std::string& id) const;

  ServiceConfig config_;
  SessionRegistry registry_;
  WorkerPool pool_;
};

/// Blocks serving on host:port until the process is stopped.
int serve(const std::string& host, int port, ServiceConfig config);

}  // namespace whim
