#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "aerodesign/aero.hpp"
#include "aerodesign/agents.hpp"
#include "aerodesign/geometry.hpp"
#include "aerodesign/optimize.hpp"
#include "aerodesign/run_store.hpp"
#include "aerodesign/sampling.hpp"

namespace aerodesign {

using Json = nlohmann::json;

struct OptimizerSettings {
  int budget = 1500;
  std::uint64_t seed = 0;
  int restarts = 3;
  double min_local_thickness = 0.005;
  double min_te_thickness = 0.0015;
  std::size_t n_points = 100;
  int kulfan_degree = kDefaultKulfanDegree;

  friend bool operator==(const OptimizerSettings&, const OptimizerSettings&) = default;
};

struct RunConfig {
  std::string run_id;  // empty: the workflow assigns one
  std::string kickoff_prompt;  // defaults to the manager_kickoff resource
  DesignSpace design_space;
  SampleStrategy sample_strategy = SampleStrategy::latin_hypercube(7);
  std::size_t sample_n = 100;
  std::size_t n_points = 200;
  double cl_floor = 0.5;
  std::size_t review_top_k = 10;
  double mach = 0.8;
  double reynolds = 5e6;
  double aoa_deg = 0.0;
  int max_iterations = 10;
  OptimizerSettings optimizer;

  RunConfig();
  FlowConditions conditions() const { return FlowConditions(mach, reynolds, aoa_deg); }
  // Throws Error(config.invalid).
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

enum class Stage { kickoff, requirements, design, review, revision, optimization, done };
std::string to_string(Stage s);
Stage stage_from_string(const std::string& s);
bool stage_transition_allowed(Stage from, Stage to);

enum class DecisionKind { accept, reject_with_comment, comment_only, proceed };
std::string to_string(DecisionKind k);
DecisionKind decision_kind_from_string(const std::string& s);

struct ManagerDecision {
  DecisionKind kind = DecisionKind::proceed;
  std::string comment;
  std::optional<int> design_id;
  std::string request_id;  // client-supplied idempotency key; may be empty

  // Reject and comment decisions need a non-empty comment.
  void validate() const;
  friend bool operator==(const ManagerDecision&, const ManagerDecision&) = default;
};

struct ReviewRecord {
  int round = 0;
  ReviewVerdict verdict;
  friend bool operator==(const ReviewRecord&, const ReviewRecord&) = default;
};

struct CandidateRecord {
  int design_id = 0;
  DesignParams params{0.0, 0.0, 0.0};
  AeroResult aero;
  std::string origin;  // "sample" or "revision"
  std::optional<int> parent;
  int iteration = 0;
  bool viable = false;  // cl >= cl_floor
  std::string rationale;
  std::vector<ReviewRecord> reviews;

  friend bool operator==(const CandidateRecord&, const CandidateRecord&) = default;
};

struct DroppedDesign {
  int design_id = 0;
  DesignParams params{0.0, 0.0, 0.0};
  std::string reason;
  friend bool operator==(const DroppedDesign&, const DroppedDesign&) = default;
};

// Why a run is waiting for the Manager.
namespace pause_kind {
inline constexpr const char* awaiting_decision = "awaiting_decision";
inline constexpr const char* no_viable_designs = "no_viable_designs";
inline constexpr const char* iteration_budget_exhausted = "iteration_budget_exhausted";
inline constexpr const char* backend_failure = "backend_failure";
inline constexpr const char* revision_failed = "revision_failed";
}  // namespace pause_kind

struct Pause {
  std::string kind;
  std::string reason;
  friend bool operator==(const Pause&, const Pause&) = default;
};

struct Event {
  std::uint64_t seq = 0;
  std::string type;
  std::string timestamp;
  Json payload;
  std::string checksum;  // chained: covers this event and every earlier one

  friend bool operator==(const Event&, const Event&) = default;
};

std::string compute_checksum(const std::string& previous, std::uint64_t seq, const std::string& type,
                             const std::string& timestamp, const Json& payload);
std::string event_to_line(const Event& e);
// Throws Error(events.corrupt) for malformed lines and Error(events.checksum)
// when a checksum or sequence number does not match.
std::vector<Event> parse_event_log(std::string_view content);

/// Everything known about a run. Built only by applying events, both live and
/// on replay, so replay(state.events) == state.
struct RunState {
  std::string run_id;
  RunConfig config;
  Stage stage = Stage::kickoff;
  std::optional<Pause> pause;
  int iteration = 0;      // revisions so far
  int round = 0;          // review rounds so far
  int design_attempts = 0;
  int next_design_id = 0;
  std::optional<RequirementsDoc> requirements;
  std::map<int, CandidateRecord> candidates;
  std::vector<DroppedDesign> dropped;
  std::vector<int> review_set;  // candidates of the current round, best first
  std::vector<ManagerDecision> decisions;
  std::optional<int> accepted_design;
  std::optional<Json> optimization;
  std::vector<std::string> warnings;
  std::vector<Event> events;

  bool finished() const { return stage == Stage::done; }
  // Latest verdict of a candidate in the given round, if any.
  const ReviewVerdict* verdict_in_round(int design_id, int round) const;

  friend bool operator==(const RunState&, const RunState&) = default;
};

// Applies one event. Throws Error(events.corrupt) for unknown types and
// Error(run.invalid_stage) for transitions outside the stage graph.
void apply(RunState& state, const Event& event);
RunState replay(std::span<const Event> events);

// JSON forms shared by the event log, the report and the HTTP API.
Json to_json(const DesignParams& p);
DesignParams design_params_from_json(const Json& j);
Json to_json(const AeroResult& r);
AeroResult aero_result_from_json(const Json& j);
Json to_json(const KulfanParams& k);
KulfanParams kulfan_from_json(const Json& j);
Json to_json(const RequirementsDoc& d);
RequirementsDoc requirements_from_json(const Json& j);
Json to_json(const ReviewVerdict& v);
ReviewVerdict review_verdict_from_json(const Json& j);
Json to_json(const ManagerDecision& d);
ManagerDecision decision_from_json(const Json& j);
Json to_json(const RunConfig& c);
// Missing keys keep their defaults; unknown keys are rejected.
RunConfig run_config_from_json(const Json& j, RunConfig base = RunConfig());
Json to_json(const CandidateRecord& c);
CandidateRecord candidate_from_json(const Json& j);
Json summary_json(const RunState& state);

// Final report: deterministic bytes (no timestamps) for a given event history.
std::string build_report(const RunState& state);
std::string candidates_to_csv(const RunState& state);

struct WorkflowDeps {
  AgentContext systems_engineer;
  AgentContext design_engineer;
  const Analyzer* analyzer = nullptr;  // null means PanelAnalyzer
  RunStore* store = nullptr;           // null keeps the run in memory only
  std::function<std::string()> clock;  // null means UTC wall clock
  unsigned threads = 1;
};

/// Drives runs through kickoff -> requirements -> design -> review <->
/// revision -> optimization -> done, pausing at every Manager gate. Each
/// state change goes through an event, appended to the run store when one is
/// attached.
class Workflow {
 public:
  explicit Workflow(WorkflowDeps deps);

  // Records run_created. Throws Error(config.invalid) or Error(run.exists).
  RunState kickoff(const RunConfig& config);

  void run_requirements(RunState& state);
  void run_design_phase(RunState& state);
  // Systems Engineer verdicts for the current round, then the Manager gate.
  void run_review(RunState& state);
  void run_revision(RunState& state);
  void run_optimization(RunState& state);

  // Runs the current stage once. Returns false when paused or done.
  bool step(RunState& state);
  // Runs stages until the run pauses or finishes.
  void advance(RunState& state);
  // Applies a Manager decision to a paused run and, unless advance_after is
  // false, advances it. A decision whose request_id was already applied is
  // ignored. Throws Error(run.not_paused) or Error(decision.invalid).
  void decide(RunState& state, const ManagerDecision& decision, bool advance_after = true);

  // Rebuilds a run from its stored event log.
  RunState resume(const std::string& run_id) const;
  // Rewrites candidates.csv (and report.json once finished).
  void persist(const RunState& state) const;

 private:
  void emit(RunState& state, const std::string& type, Json payload);
  void pause(RunState& state, const std::string& kind, const std::string& reason);
  void set_stage(RunState& state, Stage stage);
  void review_candidate(RunState& state, int design_id, const std::optional<std::string>& note,
                        bool force_invalid);
  void after_review_decision(RunState& state);
  int revision_target(const RunState& state) const;
  void write_design_artifacts(const RunState& state, int design_id, const AirfoilProfile& profile,
                              const AeroResult& aero) const;
  const Analyzer& analyzer() const;

  WorkflowDeps deps_;
};

}  // namespace aerodesign
