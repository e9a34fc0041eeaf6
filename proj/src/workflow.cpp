#include "aerodesign/workflow.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <future>
#include <regex>

#include "aerodesign/csv.hpp"
#include "aerodesign/error.hpp"
#include "aerodesign/render.hpp"
#include "aerodesign/resources.hpp"
#include "aerodesign/util.hpp"

namespace aerodesign {

namespace {

constexpr int kReportFormatVersion = 1;

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const auto secs = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()) % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  std::string out = buf;
  std::string frac = std::to_string(ms.count());
  out += "." + std::string(3 - frac.size(), '0') + frac + "Z";
  return out;
}

Json opt_int(const std::optional<int>& v) { return v ? Json(*v) : Json(nullptr); }
std::optional<int> int_opt(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<int>();
}
Json opt_double(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }
std::optional<double> double_opt(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

Json profile_points(const AirfoilProfile& p) {
  Json upper = Json::array(), lower = Json::array();
  for (const auto& pt : p.upper()) upper.push_back({pt.x, pt.y});
  for (const auto& pt : p.lower()) lower.push_back({pt.x, pt.y});
  return {{"upper", std::move(upper)}, {"lower", std::move(lower)}};
}

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(errc::log_corrupt, message);
}

struct Analysed {
  std::optional<AirfoilProfile> profile;
  std::optional<AeroResult> aero;
  std::string error;
};

std::vector<Analysed> analyse_all(const std::vector<DesignParams>& params, std::size_t n_points,
                                  const FlowConditions& conditions, const Analyzer& analyzer,
                                  unsigned threads) {
  std::vector<Analysed> out(params.size());
  auto work = [&](std::size_t i) {
    try {
      AirfoilProfile profile = generate_naca4(params[i], n_points);
      out[i].aero = analyzer.analyze(profile, conditions);
      out[i].profile = std::move(profile);
    } catch (const Error& e) {
      out[i].profile.reset();
      out[i].aero.reset();
      out[i].error = e.code() + ": " + e.what();
    }
  };
  threads = std::max(1U, threads);
  if (threads == 1) {
    for (std::size_t i = 0; i < params.size(); ++i) work(i);
    return out;
  }
  std::vector<std::future<void>> workers;
  for (unsigned w = 0; w < threads; ++w) {
    workers.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < params.size(); i += threads) work(i);
    }));
  }
  for (auto& f : workers) f.get();
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

RunConfig::RunConfig() : kickoff_prompt(resource_text("manager_kickoff")) {}

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(errc::config_invalid, m); };
  if (!run_id.empty() && !valid_run_id(run_id)) fail("run_id must match [A-Za-z0-9._-]{1,64}");
  if (trim(kickoff_prompt).empty()) fail("kickoff_prompt must not be empty");
  if (sample_n < 1) fail("sample_n must be at least 1");
  if (review_top_k < 1) fail("review_top_k must be at least 1");
  if (sample_n < review_top_k) fail("sample_n must be at least review_top_k");
  if (n_points < 21) fail("n_points must be at least 21 (the panel solver needs 40 panels)");
  if (!std::isfinite(cl_floor)) fail("cl_floor must be finite");
  if (max_iterations < 0) fail("max_iterations must be non-negative");
  if ((sample_strategy.kind == SampleKind::latin_hypercube ||
       sample_strategy.kind == SampleKind::uniform_random) &&
      !sample_strategy.seed) {
    fail("latin_hypercube and uniform_random sampling need a seed");
  }
  try {
    (void)conditions();
  } catch (const Error& e) {
    fail(std::string("flow conditions: ") + e.what());
  }
  if (optimizer.budget < 50) fail("optimizer.budget must be at least 50");
  if (optimizer.restarts < 1) fail("optimizer.restarts must be at least 1");
  if (!(optimizer.min_local_thickness > 0.0)) fail("optimizer.min_local_thickness must be positive");
  if (!(optimizer.min_te_thickness > 0.0)) fail("optimizer.min_te_thickness must be positive");
  if (optimizer.n_points < 21) fail("optimizer.n_points must be at least 21");
  if (optimizer.kulfan_degree < 2 || optimizer.kulfan_degree > 12) {
    fail("optimizer.kulfan_degree must lie in [2, 12]");
  }
}

std::string to_string(Stage s) {
  switch (s) {
    case Stage::kickoff: return "kickoff";
    case Stage::requirements: return "requirements";
    case Stage::design: return "design";
    case Stage::review: return "review";
    case Stage::revision: return "revision";
    case Stage::optimization: return "optimization";
    case Stage::done: return "done";
  }
  return "kickoff";
}

Stage stage_from_string(const std::string& s) {
  for (Stage st : {Stage::kickoff, Stage::requirements, Stage::design, Stage::review,
                   Stage::revision, Stage::optimization, Stage::done}) {
    if (to_string(st) == s) return st;
  }
  throw Error(errc::schema, "unknown stage '" + s + "'");
}

bool stage_transition_allowed(Stage from, Stage to) {
  switch (from) {
    case Stage::kickoff: return to == Stage::requirements;
    case Stage::requirements: return to == Stage::design;
    case Stage::design: return to == Stage::review;
    case Stage::review:
      return to == Stage::revision || to == Stage::optimization || to == Stage::done;
    case Stage::revision:
      return to == Stage::review || to == Stage::optimization || to == Stage::done;
    case Stage::optimization: return to == Stage::done;
    case Stage::done: return false;
  }
  return false;
}

std::string to_string(DecisionKind k) {
  switch (k) {
    case DecisionKind::accept: return "accept";
    case DecisionKind::reject_with_comment: return "reject_with_comment";
    case DecisionKind::comment_only: return "comment_only";
    case DecisionKind::proceed: return "proceed";
  }
  return "proceed";
}

DecisionKind decision_kind_from_string(const std::string& s) {
  for (DecisionKind k : {DecisionKind::accept, DecisionKind::reject_with_comment,
                         DecisionKind::comment_only, DecisionKind::proceed}) {
    if (to_string(k) == s) return k;
  }
  throw Error(errc::decision_invalid, "unknown decision kind '" + s + "'");
}

void ManagerDecision::validate() const {
  if ((kind == DecisionKind::reject_with_comment || kind == DecisionKind::comment_only) &&
      trim(comment).empty()) {
    throw Error(errc::decision_invalid, to_string(kind) + " needs a non-empty comment");
  }
}

// ---------------------------------------------------------------------------
// JSON forms

Json to_json(const DesignParams& p) {
  return {{"max_camber", p.max_camber()},
          {"camber_location", p.camber_location()},
          {"max_thickness", p.max_thickness()}};
}

DesignParams design_params_from_json(const Json& j) {
  return DesignParams(j.at("max_camber").get<double>(), j.at("camber_location").get<double>(),
                      j.at("max_thickness").get<double>());
}

Json to_json(const AeroResult& r) {
  return {{"cl", r.cl},       {"cd", r.cd},           {"cm", r.cm},
          {"l_over_d", r.l_over_d}, {"solver_id", r.solver_id}, {"beyond_validity", r.beyond_validity}};
}

AeroResult aero_result_from_json(const Json& j) {
  return AeroResult{j.at("cl").get<double>(),       j.at("cd").get<double>(),
                    j.at("cm").get<double>(),       j.at("l_over_d").get<double>(),
                    j.at("solver_id").get<std::string>(), j.at("beyond_validity").get<bool>()};
}

Json to_json(const KulfanParams& k) {
  return {{"upper", k.upper_weights()}, {"lower", k.lower_weights()},
          {"te_thickness", k.te_thickness()}};
}

KulfanParams kulfan_from_json(const Json& j) {
  return KulfanParams(j.at("upper").get<std::vector<double>>(),
                      j.at("lower").get<std::vector<double>>(), j.at("te_thickness").get<double>());
}

Json to_json(const RequirementsDoc& d) {
  return {{"functional", d.functional},
          {"non_functional", d.non_functional},
          {"provenance", d.provenance},
          {"warnings", d.warnings}};
}

RequirementsDoc requirements_from_json(const Json& j) {
  return RequirementsDoc{j.at("functional").get<std::vector<std::string>>(),
                         j.at("non_functional").get<std::vector<std::string>>(),
                         j.at("provenance").get<std::vector<std::string>>(),
                         j.at("warnings").get<std::vector<std::string>>()};
}

Json to_json(const ReviewVerdict& v) {
  Json metrics = nullptr;
  if (v.metrics_cited) {
    metrics = {{"cl", opt_double(v.metrics_cited->cl)},
               {"cd", opt_double(v.metrics_cited->cd)},
               {"cm", opt_double(v.metrics_cited->cm)}};
  }
  return {{"design_id", v.design_id},
          {"verdict", to_string(v.verdict)},
          {"feedback", v.feedback},
          {"reviewer", to_string(v.reviewer)},
          {"metrics_cited", std::move(metrics)},
          {"vision_fallback", v.vision_fallback},
          {"provenance", v.provenance}};
}

ReviewVerdict review_verdict_from_json(const Json& j) {
  ReviewVerdict v;
  v.design_id = j.at("design_id").get<int>();
  v.verdict = verdict_from_string(j.at("verdict").get<std::string>());
  v.feedback = j.at("feedback").get<std::string>();
  v.reviewer = reviewer_from_string(j.at("reviewer").get<std::string>());
  if (const auto& m = j.at("metrics_cited"); !m.is_null()) {
    v.metrics_cited = CitedMetrics{double_opt(m.at("cl")), double_opt(m.at("cd")),
                                   double_opt(m.at("cm"))};
  }
  v.vision_fallback = j.at("vision_fallback").get<bool>();
  v.provenance = j.at("provenance").get<std::vector<std::string>>();
  return v;
}

Json to_json(const ManagerDecision& d) {
  return {{"kind", to_string(d.kind)},
          {"comment", d.comment},
          {"design_id", opt_int(d.design_id)},
          {"request_id", d.request_id}};
}

ManagerDecision decision_from_json(const Json& j) {
  if (!j.is_object()) throw Error(errc::decision_invalid, "decision must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key != "kind" && key != "comment" && key != "design_id" && key != "request_id") {
      throw Error(errc::decision_invalid, "unknown decision field '" + key + "'");
    }
    (void)value;
  }
  try {
    ManagerDecision d;
    d.kind = decision_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("comment")) d.comment = j["comment"].get<std::string>();
    if (j.contains("design_id")) d.design_id = int_opt(j["design_id"]);
    if (j.contains("request_id")) d.request_id = j["request_id"].get<std::string>();
    return d;
  } catch (const Json::exception& e) {
    throw Error(errc::decision_invalid, std::string("malformed decision: ") + e.what());
  }
}

Json to_json(const RunConfig& c) {
  Json sampling = {{"kind", to_string(c.sample_strategy.kind)},
                   {"seed", c.sample_strategy.seed ? Json(*c.sample_strategy.seed) : Json(nullptr)},
                   {"skip", c.sample_strategy.skip}};
  return {{"run_id", c.run_id},
          {"kickoff_prompt", c.kickoff_prompt},
          {"design_space",
           {{"lower", c.design_space.lower()}, {"upper", c.design_space.upper()}}},
          {"sampling", std::move(sampling)},
          {"sample_n", c.sample_n},
          {"n_points", c.n_points},
          {"cl_floor", c.cl_floor},
          {"review_top_k", c.review_top_k},
          {"flow", {{"mach", c.mach}, {"reynolds", c.reynolds}, {"aoa_deg", c.aoa_deg}}},
          {"max_iterations", c.max_iterations},
          {"optimizer",
           {{"budget", c.optimizer.budget},
            {"seed", c.optimizer.seed},
            {"restarts", c.optimizer.restarts},
            {"min_local_thickness", c.optimizer.min_local_thickness},
            {"min_te_thickness", c.optimizer.min_te_thickness},
            {"n_points", c.optimizer.n_points},
            {"kulfan_degree", c.optimizer.kulfan_degree}}}};
}

RunConfig run_config_from_json(const Json& j, RunConfig c) {
  if (!j.is_object()) throw Error(errc::config_invalid, "run config must be a JSON object");
  auto unknown = [](const std::string& where, const std::string& key) {
    throw Error(errc::config_invalid, "unknown " + where + " key '" + key + "'");
  };
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "run_id") c.run_id = v.get<std::string>();
      else if (key == "kickoff_prompt") c.kickoff_prompt = v.get<std::string>();
      else if (key == "design_space") {
        c.design_space = DesignSpace(v.at("lower").get<std::array<double, 3>>(),
                                     v.at("upper").get<std::array<double, 3>>());
      } else if (key == "sampling") {
        for (const auto& [sk, sv] : v.items()) {
          if (sk == "kind") c.sample_strategy.kind = sample_kind_from_string(sv.get<std::string>());
          else if (sk == "seed") {
            c.sample_strategy.seed =
                sv.is_null() ? std::nullopt : std::optional<std::uint64_t>(sv.get<std::uint64_t>());
          } else if (sk == "skip") c.sample_strategy.skip = sv.get<std::uint64_t>();
          else unknown("sampling", sk);
        }
      } else if (key == "sample_n") {
        const auto n = v.get<long long>();
        if (n < 0) throw Error(errc::config_invalid, "sample_n must be at least 1");
        c.sample_n = static_cast<std::size_t>(n);
      } else if (key == "n_points") c.n_points = v.get<std::size_t>();
      else if (key == "cl_floor") c.cl_floor = v.get<double>();
      else if (key == "review_top_k") {
        const auto n = v.get<long long>();
        if (n < 0) throw Error(errc::config_invalid, "review_top_k must be at least 1");
        c.review_top_k = static_cast<std::size_t>(n);
      } else if (key == "flow") {
        for (const auto& [fk, fv] : v.items()) {
          if (fk == "mach") c.mach = fv.get<double>();
          else if (fk == "reynolds") c.reynolds = fv.get<double>();
          else if (fk == "aoa_deg") c.aoa_deg = fv.get<double>();
          else unknown("flow", fk);
        }
      } else if (key == "max_iterations") c.max_iterations = v.get<int>();
      else if (key == "optimizer") {
        for (const auto& [ok, ov] : v.items()) {
          if (ok == "budget") c.optimizer.budget = ov.get<int>();
          else if (ok == "seed") c.optimizer.seed = ov.get<std::uint64_t>();
          else if (ok == "restarts") c.optimizer.restarts = ov.get<int>();
          else if (ok == "min_local_thickness") c.optimizer.min_local_thickness = ov.get<double>();
          else if (ok == "min_te_thickness") c.optimizer.min_te_thickness = ov.get<double>();
          else if (ok == "n_points") c.optimizer.n_points = ov.get<std::size_t>();
          else if (ok == "kulfan_degree") c.optimizer.kulfan_degree = ov.get<int>();
          else unknown("optimizer", ok);
        }
      } else {
        unknown("run config", key);
      }
    }
  } catch (const Json::exception& e) {
    throw Error(errc::config_invalid, std::string("malformed run config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == errc::config_invalid) throw;
    throw Error(errc::config_invalid, e.what());
  }
  return c;
}

Json to_json(const CandidateRecord& c) {
  Json reviews = Json::array();
  for (const auto& r : c.reviews) reviews.push_back({{"round", r.round}, {"verdict", to_json(r.verdict)}});
  return {{"design_id", c.design_id},
          {"params", to_json(c.params)},
          {"aero", to_json(c.aero)},
          {"origin", c.origin},
          {"parent", opt_int(c.parent)},
          {"iteration", c.iteration},
          {"viable", c.viable},
          {"rationale", c.rationale},
          {"reviews", std::move(reviews)}};
}

CandidateRecord candidate_from_json(const Json& j) {
  CandidateRecord c;
  c.design_id = j.at("design_id").get<int>();
  c.params = design_params_from_json(j.at("params"));
  c.aero = aero_result_from_json(j.at("aero"));
  c.origin = j.at("origin").get<std::string>();
  c.parent = int_opt(j.at("parent"));
  c.iteration = j.at("iteration").get<int>();
  c.viable = j.at("viable").get<bool>();
  c.rationale = j.at("rationale").get<std::string>();
  for (const auto& r : j.at("reviews")) {
    c.reviews.push_back({r.at("round").get<int>(), review_verdict_from_json(r.at("verdict"))});
  }
  return c;
}

// ---------------------------------------------------------------------------
// Events

std::string compute_checksum(const std::string& previous, std::uint64_t seq, const std::string& type,
                             const std::string& timestamp, const Json& payload) {
  std::uint64_t seed = 0xcbf29ce484222325ULL;
  if (!previous.empty()) seed = std::stoull(previous, nullptr, 16);
  const Json body = {{"seq", seq}, {"type", type}, {"timestamp", timestamp}, {"payload", payload}};
  return hex64(fnv1a64(body.dump(), seed));
}

std::string event_to_line(const Event& e) {
  return Json{{"seq", e.seq},
              {"type", e.type},
              {"timestamp", e.timestamp},
              {"payload", e.payload},
              {"checksum", e.checksum}}
      .dump();
}

std::vector<Event> parse_event_log(std::string_view content) {
  std::vector<Event> events;
  std::size_t pos = 0, line_no = 0;
  std::string previous;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    const std::string_view line = content.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    Event e;
    try {
      const Json j = Json::parse(line);
      e.seq = j.at("seq").get<std::uint64_t>();
      e.type = j.at("type").get<std::string>();
      e.timestamp = j.at("timestamp").get<std::string>();
      e.payload = j.at("payload");
      e.checksum = j.at("checksum").get<std::string>();
    } catch (const Json::exception& ex) {
      throw Error(errc::log_corrupt,
                  "event log line " + std::to_string(line_no) + " is malformed: " + ex.what());
    }
    if (e.seq != events.size() + 1) {
      throw Error(errc::checksum, "event log line " + std::to_string(line_no) +
                                      ": expected seq " + std::to_string(events.size() + 1));
    }
    if (compute_checksum(previous, e.seq, e.type, e.timestamp, e.payload) != e.checksum) {
      throw Error(errc::checksum, "checksum mismatch at event " + std::to_string(e.seq));
    }
    // The checksum covers the parsed values; an edit that parses to the same
    // values (a 17th digit, spacing) still changes the stored bytes.
    if (event_to_line(e) != line) {
      throw Error(errc::checksum, "event " + std::to_string(e.seq) + " is not in canonical form");
    }
    previous = e.checksum;
    events.push_back(std::move(e));
  }
  return events;
}

const ReviewVerdict* RunState::verdict_in_round(int design_id, int r) const {
  const auto it = candidates.find(design_id);
  if (it == candidates.end()) return nullptr;
  const ReviewVerdict* found = nullptr;
  for (const auto& rec : it->second.reviews) {
    if (rec.round == r) found = &rec.verdict;
  }
  return found;
}

void apply(RunState& state, const Event& event) {
  const Json& p = event.payload;
  const std::string& t = event.type;
  auto move_to = [&](Stage to) {
    if (!stage_transition_allowed(state.stage, to)) {
      throw Error(errc::stage, "transition " + to_string(state.stage) + " -> " + to_string(to) +
                                   " is not allowed");
    }
    state.stage = to;
  };
  try {
    if (t == "run_created") {
      require(state.events.empty(), "run_created must be the first event");
      state.run_id = p.at("run_id").get<std::string>();
      state.config = run_config_from_json(p.at("config"));
      move_to(Stage::requirements);
    } else if (t == "requirements_elicited") {
      require(state.stage == Stage::requirements, "requirements outside the requirements stage");
      state.requirements = requirements_from_json(p);
      move_to(Stage::design);
    } else if (t == "design_phase_completed") {
      require(state.stage == Stage::design, "design phase outside the design stage");
      for (const auto& c : p.at("candidates")) {
        auto rec = candidate_from_json(c);
        state.candidates[rec.design_id] = std::move(rec);
      }
      for (const auto& d : p.at("dropped")) {
        state.dropped.push_back({d.at("design_id").get<int>(), design_params_from_json(d.at("params")),
                                 d.at("reason").get<std::string>()});
      }
      state.next_design_id = p.at("next_design_id").get<int>();
      state.review_set = p.at("review_set").get<std::vector<int>>();
      ++state.design_attempts;
      if (!state.review_set.empty()) {
        ++state.round;
        move_to(Stage::review);
      }
    } else if (t == "review_verdict") {
      const int id = p.at("verdict").at("design_id").get<int>();
      const auto it = state.candidates.find(id);
      require(it != state.candidates.end(), "verdict for unknown design " + std::to_string(id));
      it->second.reviews.push_back({p.at("round").get<int>(), review_verdict_from_json(p.at("verdict"))});
    } else if (t == "paused") {
      state.pause = Pause{p.at("kind").get<std::string>(), p.at("reason").get<std::string>()};
    } else if (t == "manager_decision") {
      require(state.pause.has_value(), "decision recorded for a run that is not paused");
      ManagerDecision d = decision_from_json(p);
      if (d.kind == DecisionKind::accept) state.accepted_design = d.design_id;
      state.decisions.push_back(std::move(d));
      state.pause.reset();
    } else if (t == "stage_changed") {
      const Stage to = stage_from_string(p.at("stage").get<std::string>());
      if (to == Stage::optimization) require(state.accepted_design.has_value(), "no accepted design");
      move_to(to);
    } else if (t == "revision_proposed") {
      require(state.stage == Stage::revision, "revision outside the revision stage");
      auto rec = candidate_from_json(p.at("candidate"));
      const int id = rec.design_id;
      state.iteration = rec.iteration;
      state.candidates[id] = std::move(rec);
      state.next_design_id = id + 1;
      state.review_set = {id};
      ++state.round;
      move_to(Stage::review);
    } else if (t == "optimization_completed" || t == "optimization_failed") {
      require(state.stage == Stage::optimization, "optimization outside the optimization stage");
      state.optimization = p;
      if (p.contains("warning")) state.warnings.push_back(p.at("warning").get<std::string>());
      move_to(Stage::done);
    } else if (t == "run_finished") {
      state.warnings.push_back(p.at("reason").get<std::string>());
      move_to(Stage::done);
    } else if (t == "warning") {
      state.warnings.push_back(p.at("message").get<std::string>());
    } else {
      throw Error(errc::log_corrupt, "unknown event type '" + t + "'");
    }
  } catch (const Json::exception& e) {
    throw Error(errc::log_corrupt, "event " + std::to_string(event.seq) + " (" + t +
                                       ") has a malformed payload: " + e.what());
  }
  state.events.push_back(event);
}

RunState replay(std::span<const Event> events) {
  RunState state;
  for (const auto& e : events) apply(state, e);
  return state;
}

// ---------------------------------------------------------------------------
// Reports

Json summary_json(const RunState& s) {
  Json pause = nullptr;
  if (s.pause) pause = {{"kind", s.pause->kind}, {"reason", s.pause->reason}};
  std::size_t viable = 0;
  for (const auto& [id, c] : s.candidates) viable += c.viable ? 1 : 0;
  return {{"run_id", s.run_id},
          {"stage", to_string(s.stage)},
          {"paused", s.pause.has_value()},
          {"pause", std::move(pause)},
          {"awaiting_decision", s.pause.has_value()},
          {"iteration", s.iteration},
          {"round", s.round},
          {"review_set", s.review_set},
          {"candidate_count", s.candidates.size()},
          {"viable_count", viable},
          {"dropped_count", s.dropped.size()},
          {"accepted_design", opt_int(s.accepted_design)},
          {"event_count", s.events.size()},
          {"warnings", s.warnings},
          {"config", to_json(s.config)}};
}

std::string build_report(const RunState& s) {
  Json reviewed = Json::array();
  Json revisions = Json::array();
  std::size_t viable = 0;
  for (const auto& [id, c] : s.candidates) {
    viable += c.viable ? 1 : 0;
    if (!c.reviews.empty()) reviewed.push_back(to_json(c));
    if (c.origin == "revision") {
      revisions.push_back({{"design_id", id},
                           {"iteration", c.iteration},
                           {"parent", opt_int(c.parent)},
                           {"params", to_json(c.params)},
                           {"aero", to_json(c.aero)}});
    }
  }
  Json rounds = Json::array();
  for (int r = 1; r <= s.round; ++r) {
    Json verdicts = Json::array();
    for (const auto& [id, c] : s.candidates) {
      for (const auto& rec : c.reviews) {
        if (rec.round == r) {
          verdicts.push_back({{"design_id", id},
                              {"reviewer", to_string(rec.verdict.reviewer)},
                              {"verdict", to_string(rec.verdict.verdict)}});
        }
      }
    }
    rounds.push_back({{"round", r}, {"verdicts", std::move(verdicts)}});
  }
  Json dropped = Json::array();
  for (const auto& d : s.dropped) {
    dropped.push_back({{"design_id", d.design_id}, {"params", to_json(d.params)}, {"reason", d.reason}});
  }
  Json decisions = Json::array();
  for (const auto& d : s.decisions) decisions.push_back(to_json(d));

  Json accepted = nullptr;
  Json geometry = nullptr;
  if (s.accepted_design) {
    const auto& c = s.candidates.at(*s.accepted_design);
    accepted = {{"design_id", c.design_id}, {"params", to_json(c.params)}, {"aero", to_json(c.aero)}};
    geometry = {{"accepted", profile_points(generate_naca4(c.params, s.config.n_points))}};
    if (s.optimization && s.optimization->contains("optimized")) {
      const auto init = kulfan_from_json(s.optimization->at("initial").at("kulfan"));
      const auto opt = kulfan_from_json(s.optimization->at("optimized").at("kulfan"));
      geometry["initial"] = profile_points(from_kulfan(init, s.config.n_points));
      geometry["optimized"] = profile_points(from_kulfan(opt, s.config.n_points));
    }
  }

  Json report = {{"format_version", kReportFormatVersion},
                 {"run_id", s.run_id},
                 {"stage", to_string(s.stage)},
                 {"config", to_json(s.config)},
                 {"requirements", s.requirements ? to_json(*s.requirements) : Json(nullptr)},
                 {"design_phase",
                  {{"attempts", s.design_attempts},
                   {"analysed", s.candidates.size() - revisions.size()},
                   {"viable", viable},
                   {"dropped", std::move(dropped)}}},
                 {"review_rounds", std::move(rounds)},
                 {"reviewed_candidates", std::move(reviewed)},
                 {"revisions", std::move(revisions)},
                 {"decisions", std::move(decisions)},
                 {"accepted_design", std::move(accepted)},
                 {"optimization", s.optimization ? *s.optimization : Json(nullptr)},
                 {"geometry", std::move(geometry)},
                 {"warnings", s.warnings},
                 {"event_log", {{"file", "events.jsonl"}, {"events", s.events.size()}}}};
  return report.dump(2) + "\n";
}

std::string candidates_to_csv(const RunState& s) {
  std::string out =
      "design_id,origin,parent,iteration,max_camber,camber_location,max_thickness,cl,cd,cm,"
      "l_over_d,solver_id,viable,last_verdict\n";
  for (const auto& [id, c] : s.candidates) {
    const std::string verdict = c.reviews.empty() ? "" : to_string(c.reviews.back().verdict.verdict);
    out += csv::format_row({std::to_string(id), c.origin, c.parent ? std::to_string(*c.parent) : "",
                            std::to_string(c.iteration), format_double(c.params.max_camber()),
                            format_double(c.params.camber_location()),
                            format_double(c.params.max_thickness()), format_double(c.aero.cl),
                            format_double(c.aero.cd), format_double(c.aero.cm),
                            format_double(c.aero.l_over_d), c.aero.solver_id,
                            c.viable ? "true" : "false", verdict});
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Workflow

Workflow::Workflow(WorkflowDeps deps) : deps_(std::move(deps)) {
  if (!deps_.clock) deps_.clock = utc_now;
}

const Analyzer& Workflow::analyzer() const {
  static const PanelAnalyzer panel;
  return deps_.analyzer ? *deps_.analyzer : panel;
}

void Workflow::emit(RunState& state, const std::string& type, Json payload) {
  Event e;
  e.seq = state.events.size() + 1;
  e.type = type;
  e.timestamp = deps_.clock();
  e.payload = std::move(payload);
  e.checksum = compute_checksum(state.events.empty() ? std::string() : state.events.back().checksum,
                                e.seq, e.type, e.timestamp, e.payload);
  apply(state, e);
  if (deps_.store) deps_.store->append_event(state.run_id, event_to_line(e));
}

void Workflow::pause(RunState& state, const std::string& kind, const std::string& reason) {
  emit(state, "paused", {{"kind", kind}, {"reason", reason}});
}

void Workflow::set_stage(RunState& state, Stage stage) {
  emit(state, "stage_changed", {{"stage", to_string(stage)}});
}

void Workflow::write_design_artifacts(const RunState& state, int design_id,
                                      const AirfoilProfile& profile, const AeroResult& aero) const {
  if (!deps_.store) return;
  const std::string id = std::to_string(design_id);
  deps_.store->write_artifact(state.run_id, "profiles/" + id + ".csv", profile_to_csv(profile));
  RenderSpec spec;
  spec.title = "Design ID-" + id;
  spec.show_params = true;
  spec.metrics = aero;
  deps_.store->write_artifact(state.run_id, "renders/" + id + ".svg", render_profile(profile, spec));
}

RunState Workflow::kickoff(const RunConfig& config_in) {
  RunConfig config = config_in;
  config.validate();
  if (config.run_id.empty()) {
    const std::string base = "run-" + hex64(fnv1a64(to_json(config).dump())).substr(0, 8);
    config.run_id = base;
    for (int n = 2; deps_.store && deps_.store->exists(config.run_id); ++n) {
      config.run_id = base + "-" + std::to_string(n);
    }
  }
  if (deps_.store) deps_.store->create(config.run_id);
  RunState state;
  state.run_id = config.run_id;
  emit(state, "run_created", {{"run_id", config.run_id}, {"config", to_json(config)}});
  persist(state);
  return state;
}

void Workflow::run_requirements(RunState& state) {
  if (state.stage != Stage::requirements) throw Error(errc::stage, "not in the requirements stage");
  try {
    const auto doc = elicit_requirements(state.config.kickoff_prompt, deps_.systems_engineer);
    emit(state, "requirements_elicited", to_json(doc));
  } catch (const Error& e) {
    if (e.code() != errc::backend && e.code() != errc::unparseable) throw;
    pause(state, pause_kind::backend_failure, std::string("requirement elicitation: ") + e.what());
  }
}

void Workflow::run_design_phase(RunState& state) {
  if (state.stage != Stage::design) throw Error(errc::stage, "not in the design stage");
  if (!state.requirements) throw Error(errc::stage, "design phase needs requirements");
  const RunConfig& cfg = state.config;
  SampleStrategy strategy = cfg.sample_strategy;
  const auto attempt = static_cast<std::uint64_t>(state.design_attempts);
  if (attempt > 0) {
    if (strategy.seed) *strategy.seed += attempt;
    else strategy.skip += attempt * cfg.sample_n;
  }
  const auto params = sample(cfg.design_space, strategy, cfg.sample_n);
  const auto analysed =
      analyse_all(params, cfg.n_points, cfg.conditions(), analyzer(), deps_.threads);

  Json candidates = Json::array();
  Json dropped = Json::array();
  std::vector<std::pair<int, double>> viable;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const int id = state.next_design_id + static_cast<int>(i);
    if (!analysed[i].aero) {
      dropped.push_back({{"design_id", id}, {"params", to_json(params[i])}, {"reason", analysed[i].error}});
      continue;
    }
    CandidateRecord rec;
    rec.design_id = id;
    rec.params = params[i];
    rec.aero = *analysed[i].aero;
    rec.origin = "sample";
    rec.iteration = state.iteration;
    rec.viable = rec.aero.cl >= cfg.cl_floor;
    if (rec.viable) viable.emplace_back(id, rec.aero.l_over_d);
    write_design_artifacts(state, id, *analysed[i].profile, rec.aero);
    candidates.push_back(to_json(rec));
  }
  std::sort(viable.begin(), viable.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<int> review_set;
  for (std::size_t i = 0; i < viable.size() && i < cfg.review_top_k; ++i) {
    review_set.push_back(viable[i].first);
  }
  const std::size_t analysed_count = candidates.size();
  emit(state, "design_phase_completed",
       {{"candidates", std::move(candidates)},
        {"dropped", std::move(dropped)},
        {"review_set", review_set},
        {"viable_count", viable.size()},
        {"next_design_id", state.next_design_id + static_cast<int>(params.size())},
        {"sampling",
         {{"kind", to_string(strategy.kind)},
          {"seed", strategy.seed ? Json(*strategy.seed) : Json(nullptr)},
          {"skip", strategy.skip}}}});
  if (review_set.empty()) {
    pause(state, pause_kind::no_viable_designs,
          "no viable designs: none of the " + std::to_string(analysed_count) +
              " analysed candidates reaches cl >= " + format_fixed(cfg.cl_floor, 3));
  }
}

void Workflow::review_candidate(RunState& state, int design_id, const std::optional<std::string>& note,
                                bool force_invalid) {
  const auto& c = state.candidates.at(design_id);
  const AirfoilProfile profile = generate_naca4(c.params, state.config.n_points);
  const DesignUnderReview design{design_id, c.params, &profile, c.aero};
  ReviewVerdict v = review_design(design, *state.requirements, deps_.systems_engineer, note);
  if (force_invalid) {
    v.verdict = Verdict::invalid;
    v.reviewer = Reviewer::manager;
  }
  emit(state, "review_verdict", {{"round", state.round}, {"verdict", to_json(v)}});
}

void Workflow::run_review(RunState& state) {
  if (state.stage != Stage::review) throw Error(errc::stage, "not in the review stage");
  if (!state.requirements) throw Error(errc::stage, "review needs requirements");
  for (const int id : state.review_set) {
    if (state.verdict_in_round(id, state.round)) continue;
    try {
      review_candidate(state, id, std::nullopt, false);
    } catch (const Error& e) {
      if (e.code() != errc::backend && e.code() != errc::unparseable) throw;
      pause(state, pause_kind::backend_failure,
            "review of design " + std::to_string(id) + ": " + e.what());
      return;
    }
  }
  std::size_t valid = 0, invalid = 0;
  for (const int id : state.review_set) {
    (state.verdict_in_round(id, state.round)->verdict == Verdict::valid ? valid : invalid) += 1;
  }
  pause(state, pause_kind::awaiting_decision,
        "review round " + std::to_string(state.round) + ": " + std::to_string(valid) + " valid, " +
            std::to_string(invalid) + " invalid");
}

void Workflow::after_review_decision(RunState& state) {
  for (const int id : state.review_set) {
    const auto* v = state.verdict_in_round(id, state.round);
    if (v && v->verdict == Verdict::invalid) {
      set_stage(state, Stage::revision);
      return;
    }
  }
  pause(state, pause_kind::awaiting_decision,
        "every design in review round " + std::to_string(state.round) +
            " is valid; accept one or comment");
}

int Workflow::revision_target(const RunState& state) const {
  std::vector<int> invalid;
  for (const int id : state.review_set) {
    const auto* v = state.verdict_in_round(id, state.round);
    if (v && v->verdict == Verdict::invalid) invalid.push_back(id);
  }
  if (invalid.empty()) throw Error(errc::stage, "no invalid verdict to revise");
  auto is_invalid = [&](int id) {
    return std::find(invalid.begin(), invalid.end(), id) != invalid.end();
  };
  if (!state.decisions.empty()) {
    const auto& d = state.decisions.back();
    if (d.kind == DecisionKind::reject_with_comment || d.kind == DecisionKind::comment_only) {
      static const std::regex named(R"(design\s*(?:id)?[\s#:-]*([0-9]+))", std::regex::icase);
      std::smatch m;
      if (std::regex_search(d.comment, m, named)) {
        const int id = std::stoi(m[1]);
        if (is_invalid(id)) return id;
      }
      if (d.design_id && is_invalid(*d.design_id)) return *d.design_id;
    }
  }
  int best = invalid.front();
  for (const int id : invalid) {
    const double a = state.candidates.at(id).aero.l_over_d;
    const double b = state.candidates.at(best).aero.l_over_d;
    if (a > b || (a == b && id < best)) best = id;
  }
  return best;
}

void Workflow::run_revision(RunState& state) {
  if (state.stage != Stage::revision) throw Error(errc::stage, "not in the revision stage");
  const RunConfig& cfg = state.config;
  if (state.iteration >= cfg.max_iterations) {
    pause(state, pause_kind::iteration_budget_exhausted,
          "iteration budget exhausted after " + std::to_string(state.iteration) + " revisions");
    return;
  }
  const int target = revision_target(state);
  const auto& parent = state.candidates.at(target);
  const ReviewVerdict& verdict = *state.verdict_in_round(target, state.round);
  RevisionProposal proposal;
  try {
    proposal = propose_revision(verdict, parent.params, state.iteration + 1, cfg.design_space,
                                deps_.design_engineer);
  } catch (const Error& e) {
    if (e.code() != errc::backend && e.code() != errc::unparseable && e.code() != errc::out_of_space) {
      throw;
    }
    pause(state, pause_kind::revision_failed, std::string("revision proposal failed: ") + e.what());
    return;
  }
  CandidateRecord rec;
  rec.design_id = state.next_design_id;
  rec.params = proposal.new_params;
  rec.origin = "revision";
  rec.parent = target;
  rec.iteration = state.iteration + 1;
  rec.rationale = proposal.rationale;
  try {
    const AirfoilProfile profile = generate_naca4(rec.params, cfg.n_points);
    rec.aero = analyzer().analyze(profile, cfg.conditions());
    write_design_artifacts(state, rec.design_id, profile, rec.aero);
  } catch (const Error& e) {
    pause(state, pause_kind::revision_failed,
          std::string("revised design could not be analysed: ") + e.what());
    return;
  }
  rec.viable = rec.aero.cl >= cfg.cl_floor;
  Json payload = {{"candidate", to_json(rec)}, {"clamped", proposal.clamped},
                  {"provenance", proposal.provenance}};
  emit(state, "revision_proposed", std::move(payload));
}

void Workflow::run_optimization(RunState& state) {
  if (state.stage != Stage::optimization) throw Error(errc::stage, "not in the optimization stage");
  const RunConfig& cfg = state.config;
  const auto& accepted = state.candidates.at(*state.accepted_design);
  try {
    const AirfoilProfile profile = generate_naca4(accepted.params, cfg.n_points);
    const KulfanFit fit = to_kulfan(profile, cfg.optimizer.kulfan_degree);
    OptimizationProblem problem{fit.params};
    problem.conditions = cfg.conditions();
    problem.min_local_thickness = cfg.optimizer.min_local_thickness;
    problem.min_te_thickness = cfg.optimizer.min_te_thickness;
    problem.budget = cfg.optimizer.budget;
    problem.n_points = cfg.optimizer.n_points;
    problem.seed = cfg.optimizer.seed;
    problem.restarts = cfg.optimizer.restarts;
    problem.analyzer = deps_.analyzer;
    const OptimizationResult r = optimize_ld(problem);

    Json stations = Json::array();
    for (const auto& s : r.audit.stations) {
      stations.push_back({{"x", s.x}, {"thickness", s.thickness}, {"minimum", s.minimum}, {"ok", s.ok}});
    }
    Json summary = {
        {"accepted_design_id", accepted.design_id},
        {"kulfan_degree", cfg.optimizer.kulfan_degree},
        {"fit_max_residual", fit.max_residual},
        {"initial", {{"kulfan", to_json(r.initial)}, {"aero", to_json(r.initial_aero)}}},
        {"optimized", {{"kulfan", to_json(r.optimized)}, {"aero", to_json(r.final_aero)}}},
        {"improved", r.improved},
        {"evaluations", r.evaluations},
        {"repaired_start", r.repaired_start},
        {"audit",
         {{"stations", std::move(stations)},
          {"te_thickness", r.audit.te_thickness},
          {"te_minimum", r.audit.te_minimum},
          {"te_ok", r.audit.te_ok},
          {"all_ok", r.audit.all_ok()}}},
        {"optimizer_warnings", r.warnings},
        {"trajectory_file", "optimization_trajectory.csv"},
        {"trajectory_points", r.trajectory.size()}};
    if (deps_.store) {
      const AirfoilProfile initial_profile = from_kulfan(r.initial, cfg.n_points);
      const AirfoilProfile optimized_profile = from_kulfan(r.optimized, cfg.n_points);
      deps_.store->write_artifact(state.run_id, "optimization_trajectory.csv",
                                  trajectory_to_csv(r.trajectory));
      deps_.store->write_artifact(state.run_id, "profiles/initial.csv", profile_to_csv(initial_profile));
      deps_.store->write_artifact(state.run_id, "profiles/optimized.csv",
                                  profile_to_csv(optimized_profile));
      RenderSpec spec;
      spec.title = "Optimized design vs initial design";
      deps_.store->write_artifact(
          state.run_id, "renders/comparison.svg",
          render_comparison(initial_profile, optimized_profile, spec,
                            "initial (design " + std::to_string(accepted.design_id) + ")",
                            "optimized"));
    }
    emit(state, "optimization_completed", std::move(summary));
  } catch (const Error& e) {
    emit(state, "optimization_failed",
         {{"accepted_design_id", accepted.design_id},
          {"warning", std::string("optimizer failed, the accepted design is the deliverable: ") +
                          e.what()}});
  }
}

bool Workflow::step(RunState& state) {
  if (state.pause || state.stage == Stage::done) return false;
  switch (state.stage) {
    case Stage::kickoff: throw Error(errc::stage, "run was never kicked off");
    case Stage::requirements: run_requirements(state); break;
    case Stage::design: run_design_phase(state); break;
    case Stage::review: run_review(state); break;
    case Stage::revision: run_revision(state); break;
    case Stage::optimization: run_optimization(state); break;
    case Stage::done: break;
  }
  return !state.pause && state.stage != Stage::done;
}

void Workflow::advance(RunState& state) {
  while (step(state)) {
  }
  persist(state);
}

void Workflow::decide(RunState& state, const ManagerDecision& decision_in, bool advance_after) {
  if (!decision_in.request_id.empty()) {
    for (const auto& d : state.decisions) {
      if (d.request_id == decision_in.request_id) return;
    }
  }
  decision_in.validate();
  if (!state.pause) {
    throw Error(errc::not_paused, "run '" + state.run_id + "' is " + to_string(state.stage) +
                                      " and not waiting for a decision");
  }
  ManagerDecision d = decision_in;
  const std::string kind = state.pause->kind;
  if (!d.design_id && !state.review_set.empty() && d.kind != DecisionKind::proceed) {
    d.design_id = state.review_set.front();
  }
  auto invalid = [](const std::string& m) { throw Error(errc::decision_invalid, m); };

  switch (d.kind) {
    case DecisionKind::accept: {
      if (!d.design_id) invalid("accept needs a design id");
      const auto it = state.candidates.find(*d.design_id);
      if (it == state.candidates.end() || it->second.reviews.empty()) {
        invalid("design " + std::to_string(*d.design_id) + " has not been reviewed");
      }
      emit(state, "manager_decision", to_json(d));
      set_stage(state, Stage::optimization);
      break;
    }
    case DecisionKind::reject_with_comment:
    case DecisionKind::comment_only: {
      if (kind != pause_kind::awaiting_decision) {
        invalid(to_string(d.kind) + " is only possible at a review gate");
      }
      if (std::find(state.review_set.begin(), state.review_set.end(), *d.design_id) ==
          state.review_set.end()) {
        invalid("design " + std::to_string(*d.design_id) + " is not under review");
      }
      emit(state, "manager_decision", to_json(d));
      try {
        review_candidate(state, *d.design_id, d.comment,
                         d.kind == DecisionKind::reject_with_comment);
      } catch (const Error& e) {
        if (e.code() != errc::backend && e.code() != errc::unparseable) throw;
        pause(state, pause_kind::backend_failure,
              "merging the Manager comment failed: " + std::string(e.what()));
        break;
      }
      after_review_decision(state);
      break;
    }
    case DecisionKind::proceed: {
      emit(state, "manager_decision", to_json(d));
      if (kind == pause_kind::awaiting_decision) {
        after_review_decision(state);
      } else if (kind == pause_kind::iteration_budget_exhausted) {
        emit(state, "run_finished", {{"reason", "iteration budget exhausted without an accepted design"}});
      }
      break;
    }
  }
  if (advance_after) advance(state);
  else persist(state);
}

RunState Workflow::resume(const std::string& run_id) const {
  if (!deps_.store) throw Error(errc::run_not_found, "no run store attached");
  const auto events = parse_event_log(deps_.store->read_events(run_id));
  return replay(events);
}

void Workflow::persist(const RunState& state) const {
  if (!deps_.store) return;
  deps_.store->write_artifact(state.run_id, "candidates.csv", candidates_to_csv(state));
  if (state.finished()) deps_.store->write_artifact(state.run_id, "report.json", build_report(state));
}

}  // namespace aerodesign
