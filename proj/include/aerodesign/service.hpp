#pragma once

#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "aerodesign/workflow.hpp"

namespace httplib {
class Server;
}

namespace aerodesign {

inline constexpr int kApiVersion = 1;

/// Error body of every non-2xx response: {"code", "message", "detail"}.
struct ApiError {
  std::string code;
  std::string message;
  Json detail = nullptr;
};

// HTTP status for an error code: 400 validation, 404 unknown ids, 409 state
// conflicts, 502 backend trouble, 500 otherwise.
int http_status_for(const std::string& code);
Json to_json(const ApiError& e);

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
  std::string request_id;  // Idempotency-Key header, when present
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// The run-management API. Each run has one writer: mutations are applied on
/// a per-run worker thread, readers get an immutable snapshot published after
/// every stage step.
///
///     GET  /api/version
///     GET  /api/runs                        run summaries
///     POST /api/runs                        RunConfig JSON, starts a run (202)
///     GET  /api/runs/{id}                   summary
///     GET  /api/runs/{id}/candidates        candidate table and review set
///     GET  /api/runs/{id}/report            report.json once finished
///     POST /api/runs/{id}/decision          ManagerDecision JSON (202)
///     GET  /api/runs/{id}/events?since=N    events with seq > N
///     GET  /api/candidates/{run}:{design}/render.svg
///     GET  /api/candidates/{run}:{design}/aero
///
/// POST bodies may carry "request_id" (or the Idempotency-Key header); a
/// repeated id returns the original response without applying anything.
class Service {
 public:
  explicit Service(WorkflowDeps deps, RunConfig defaults = RunConfig());
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  ApiResponse handle(const ApiRequest& request);

  // Blocks until every run worker is idle.
  void wait_idle();

  // Binds and serves until stop(). Returns false when the address is taken.
  bool listen(const std::string& host, int port);
  // Binds to a free port and serves on a background thread; returns the port.
  int start_background(const std::string& host = "127.0.0.1");
  void stop();

 private:
  struct Run {
    std::mutex mutex;  // the writer lock, guards state and busy
    RunState state;
    bool busy = false;
    std::condition_variable idle;
    std::mutex snapshot_mutex;
    std::shared_ptr<const RunState> snapshot;
  };

  std::shared_ptr<Run> find_run(const std::string& id);
  std::shared_ptr<const RunState> snapshot(const std::string& id);
  void schedule_advance(const std::shared_ptr<Run>& run);
  void publish(Run& run);
  void load_existing();

  ApiResponse create_run(const ApiRequest& request);
  ApiResponse post_decision(const std::string& run_id, const ApiRequest& request);
  ApiResponse candidate_resource(const std::string& key, const std::string& what);

  WorkflowDeps deps_;
  RunConfig defaults_;
  Workflow workflow_;
  std::mutex runs_mutex_;
  std::map<std::string, std::shared_ptr<Run>> runs_;
  std::map<std::string, ApiResponse> create_requests_;
  std::mutex workers_mutex_;
  std::vector<std::thread> workers_;
  std::unique_ptr<httplib::Server> server_;
  std::thread server_thread_;
};

}  // namespace aerodesign
