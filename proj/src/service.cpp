#include "aerodesign/service.hpp"

#include <httplib.h>

#include <regex>

#include "aerodesign/error.hpp"
#include "aerodesign/render.hpp"
#include "aerodesign/util.hpp"

namespace aerodesign {

namespace {

ApiResponse json_response(int status, const Json& body) {
  return ApiResponse{status, "application/json", body.dump()};
}

ApiResponse error_response(const std::string& code, const std::string& message,
                           Json detail = nullptr) {
  return json_response(http_status_for(code), to_json(ApiError{code, message, std::move(detail)}));
}

Json event_json(const Event& e) {
  return {{"seq", e.seq},
          {"type", e.type},
          {"timestamp", e.timestamp},
          {"payload", e.payload},
          {"checksum", e.checksum}};
}

Json candidate_row(const CandidateRecord& c, bool in_review) {
  Json j = to_json(c);
  j["in_review"] = in_review;
  return j;
}

std::pair<std::string, int> split_candidate_key(const std::string& key) {
  const auto colon = key.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == key.size()) {
    throw Error(errc::run_not_found, "candidate id must look like <run_id>:<design_id>");
  }
  const std::string digits = key.substr(colon + 1);
  if (digits.find_first_not_of("0123456789") != std::string::npos || digits.size() > 9) {
    throw Error(errc::run_not_found, "unknown candidate '" + key + "'");
  }
  return {key.substr(0, colon), std::stoi(digits)};
}

}  // namespace

int http_status_for(const std::string& code) {
  if (code == errc::config_invalid || code == errc::decision_invalid || code == errc::schema ||
      code == "request.invalid") {
    return 400;
  }
  if (code == errc::run_not_found || code == "route.not_found") return 404;
  if (code == errc::not_paused || code == errc::run_exists || code == errc::stage) return 409;
  if (code == errc::backend || code == errc::unparseable) return 502;
  return 500;
}

Json to_json(const ApiError& e) {
  return {{"code", e.code}, {"message", e.message}, {"detail", e.detail}};
}

Service::Service(WorkflowDeps deps, RunConfig defaults)
    : deps_(std::move(deps)), defaults_(std::move(defaults)), workflow_(deps_) {
  load_existing();
}

Service::~Service() {
  stop();
  wait_idle();
  std::lock_guard lock(workers_mutex_);
  for (auto& t : workers_) {
    if (t.joinable()) t.join();
  }
}

void Service::load_existing() {
  if (!deps_.store) return;
  for (const auto& id : deps_.store->list_runs()) {
    try {
      auto run = std::make_shared<Run>();
      run->state = workflow_.resume(id);
      publish(*run);
      runs_[id] = std::move(run);
    } catch (const Error&) {
      // Runs with unreadable logs stay on disk but are not served.
    }
  }
}

void Service::publish(Run& run) {
  auto snap = std::make_shared<const RunState>(run.state);
  std::lock_guard lock(run.snapshot_mutex);
  run.snapshot = std::move(snap);
}

std::shared_ptr<Service::Run> Service::find_run(const std::string& id) {
  std::lock_guard lock(runs_mutex_);
  const auto it = runs_.find(id);
  if (it == runs_.end()) throw Error(errc::run_not_found, "unknown run '" + id + "'");
  return it->second;
}

std::shared_ptr<const RunState> Service::snapshot(const std::string& id) {
  auto run = find_run(id);
  std::lock_guard lock(run->snapshot_mutex);
  return run->snapshot;
}

void Service::schedule_advance(const std::shared_ptr<Run>& run) {
  {
    std::lock_guard lock(run->mutex);
    if (run->busy) return;
    run->busy = true;
  }
  std::lock_guard lock(workers_mutex_);
  workers_.emplace_back([this, run] {
    for (;;) {
      std::unique_lock lock(run->mutex);
      bool more = false;
      try {
        more = workflow_.step(run->state);
      } catch (const Error& e) {
        run->state.warnings.push_back(std::string("worker stopped: ") + e.code() + ": " + e.what());
      }
      publish(*run);
      if (!more) {
        try {
          workflow_.persist(run->state);
        } catch (const Error&) {
        }
        run->busy = false;
        run->idle.notify_all();
        return;
      }
    }
  });
}

void Service::wait_idle() {
  std::vector<std::shared_ptr<Run>> runs;
  {
    std::lock_guard lock(runs_mutex_);
    for (const auto& [id, r] : runs_) runs.push_back(r);
  }
  for (const auto& r : runs) {
    std::unique_lock lock(r->mutex);
    r->idle.wait(lock, [&] { return !r->busy; });
  }
}

ApiResponse Service::create_run(const ApiRequest& request) {
  Json body;
  try {
    body = request.body.empty() ? Json::object() : Json::parse(request.body);
  } catch (const Json::exception& e) {
    return error_response("request.invalid", std::string("body is not JSON: ") + e.what());
  }
  if (!body.is_object()) return error_response("request.invalid", "body must be a JSON object");
  std::string request_id = request.request_id;
  if (body.contains("request_id")) {
    if (!body["request_id"].is_string()) return error_response("request.invalid", "request_id must be a string");
    request_id = body["request_id"].get<std::string>();
    body.erase("request_id");
  }
  std::lock_guard create_lock(runs_mutex_);
  if (!request_id.empty()) {
    const auto it = create_requests_.find(request_id);
    if (it != create_requests_.end()) return it->second;
  }
  RunConfig config = run_config_from_json(body, defaults_);
  if (!config.run_id.empty() && runs_.count(config.run_id)) {
    throw Error(errc::run_exists, "run '" + config.run_id + "' already exists");
  }
  auto run = std::make_shared<Run>();
  run->state = workflow_.kickoff(config);
  publish(*run);
  const std::string id = run->state.run_id;
  runs_[id] = run;
  ApiResponse response = json_response(202, summary_json(run->state));
  if (!request_id.empty()) create_requests_[request_id] = response;
  schedule_advance(run);
  return response;
}

ApiResponse Service::post_decision(const std::string& run_id, const ApiRequest& request) {
  auto run = find_run(run_id);
  Json body;
  try {
    body = Json::parse(request.body);
  } catch (const Json::exception& e) {
    return error_response("request.invalid", std::string("body is not JSON: ") + e.what());
  }
  if (body.is_object() && !body.contains("request_id") && !request.request_id.empty()) {
    body["request_id"] = request.request_id;
  }
  const ManagerDecision decision = decision_from_json(body);
  {
    std::lock_guard lock(run->mutex);
    if (run->busy) {
      throw Error(errc::not_paused, "run '" + run_id + "' is busy and not waiting for a decision");
    }
    workflow_.decide(run->state, decision, false);
    publish(*run);
  }
  schedule_advance(run);
  std::lock_guard lock(run->snapshot_mutex);
  return json_response(202, summary_json(*run->snapshot));
}

ApiResponse Service::candidate_resource(const std::string& key, const std::string& what) {
  const auto [run_id, design_id] = split_candidate_key(key);
  const auto snap = snapshot(run_id);
  const auto it = snap->candidates.find(design_id);
  if (it == snap->candidates.end()) {
    throw Error(errc::run_not_found, "unknown candidate '" + key + "'");
  }
  const CandidateRecord& c = it->second;
  if (what == "aero") {
    return json_response(200, {{"run_id", run_id},
                               {"design_id", design_id},
                               {"params", to_json(c.params)},
                               {"aero", to_json(c.aero)},
                               {"viable", c.viable}});
  }
  const std::string artifact = "renders/" + std::to_string(design_id) + ".svg";
  std::string svg;
  if (deps_.store && deps_.store->has_artifact(run_id, artifact)) {
    svg = deps_.store->read_artifact(run_id, artifact);
  } else {
    RenderSpec spec;
    spec.title = "Design ID-" + std::to_string(design_id);
    spec.metrics = c.aero;
    svg = render_profile(generate_naca4(c.params, snap->config.n_points), spec);
  }
  return ApiResponse{200, "image/svg+xml", std::move(svg)};
}

ApiResponse Service::handle(const ApiRequest& request) {
  static const std::regex run_route(R"(^/api/runs/([^/]+)(/[a-z]+)?$)");
  static const std::regex candidate_route(R"(^/api/candidates/([^/]+)/(render\.svg|aero)$)");
  try {
    const std::string& path = request.path;
    const bool get = request.method == "GET";
    const bool post = request.method == "POST";
    if (path == "/api/version" && get) {
      return json_response(200, {{"api_version", kApiVersion},
                                 {"schemas",
                                  {{"run_config", 1},
                                   {"run_summary", 1},
                                   {"candidate", 1},
                                   {"decision", 1},
                                   {"event", 1},
                                   {"report", 1},
                                   {"error", 1}}}});
    }
    if (path == "/api/runs") {
      if (post) return create_run(request);
      if (get) {
        std::vector<std::shared_ptr<Run>> runs;
        {
          std::lock_guard lock(runs_mutex_);
          for (const auto& [id, r] : runs_) runs.push_back(r);
        }
        Json list = Json::array();
        for (const auto& r : runs) {
          std::lock_guard lock(r->snapshot_mutex);
          Json s = summary_json(*r->snapshot);
          s.erase("config");
          list.push_back(std::move(s));
        }
        return json_response(200, {{"runs", std::move(list)}});
      }
    }
    std::smatch m;
    if (std::regex_match(path, m, run_route)) {
      const std::string id = m[1];
      const std::string sub = m[2];
      if (sub.empty() && get) return json_response(200, summary_json(*snapshot(id)));
      if (sub == "/candidates" && get) {
        const auto snap = snapshot(id);
        Json rows = Json::array();
        for (const auto& [did, c] : snap->candidates) {
          const bool in_review = std::find(snap->review_set.begin(), snap->review_set.end(), did) !=
                                 snap->review_set.end();
          rows.push_back(candidate_row(c, in_review));
        }
        return json_response(200, {{"run_id", id},
                                   {"round", snap->round},
                                   {"review_set", snap->review_set},
                                   {"candidates", std::move(rows)}});
      }
      if (sub == "/report" && get) {
        const auto snap = snapshot(id);
        if (!snap->finished()) throw Error(errc::stage, "run '" + id + "' has not finished");
        return ApiResponse{200, "application/json", build_report(*snap)};
      }
      if (sub == "/events" && get) {
        std::uint64_t since = 0;
        if (const auto q = request.query.find("since"); q != request.query.end()) {
          if (q->second.empty() || q->second.find_first_not_of("0123456789") != std::string::npos) {
            return error_response("request.invalid", "since must be a non-negative integer");
          }
          since = std::stoull(q->second);
        }
        const auto snap = snapshot(id);
        Json events = Json::array();
        for (const auto& e : snap->events) {
          if (e.seq > since) events.push_back(event_json(e));
        }
        return json_response(200, {{"run_id", id},
                                   {"head", snap->events.size()},
                                   {"events", std::move(events)}});
      }
      if (sub == "/decision" && post) return post_decision(id, request);
    }
    if (std::regex_match(path, m, candidate_route) && get) {
      return candidate_resource(m[1], m[2] == "aero" ? "aero" : "render");
    }
    return error_response("route.not_found", "no route for " + request.method + " " + path);
  } catch (const Error& e) {
    return error_response(e.code(), e.what());
  } catch (const Json::exception& e) {
    return error_response("request.invalid", e.what());
  }
}

namespace {

void install_routes(httplib::Server& server, Service& service) {
  auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    ApiRequest r;
    r.method = req.method;
    r.path = req.path;
    for (const auto& [k, v] : req.params) r.query[k] = v;
    r.body = req.body;
    r.request_id = req.get_header_value("Idempotency-Key");
    const ApiResponse out = service.handle(r);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  server.Get(R"(/api/.*)", forward);
  server.Post(R"(/api/.*)", forward);
}

}  // namespace

bool Service::listen(const std::string& host, int port) {
  server_ = std::make_unique<httplib::Server>();
  install_routes(*server_, *this);
  return server_->listen(host, port);
}

int Service::start_background(const std::string& host) {
  server_ = std::make_unique<httplib::Server>();
  install_routes(*server_, *this);
  const int port = server_->bind_to_any_port(host);
  if (port < 0) throw Error(errc::io, "cannot bind " + host);
  server_thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void Service::stop() {
  if (server_) server_->stop();
  if (server_thread_.joinable()) server_thread_.join();
}

}  // namespace aerodesign
