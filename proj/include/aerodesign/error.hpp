#pragma once

#include <stdexcept>
#include <string>

namespace aerodesign {

// Every library failure carries a stable machine-readable code such as
// "geometry.degenerate" or "config.invalid". The service layer maps these
// codes straight onto ApiError payloads.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message);

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

namespace errc {
inline constexpr const char* domain = "domain";
inline constexpr const char* geometry_invalid = "geometry.invalid";
inline constexpr const char* geometry_degenerate = "geometry.degenerate";
inline constexpr const char* geometry_self_intersecting = "geometry.self_intersecting";
inline constexpr const char* fit_failed = "geometry.fit_failed";
inline constexpr const char* sampling_invalid = "sampling.invalid";
inline constexpr const char* solver_diverged = "aero.solver_diverged";
inline constexpr const char* singular_matrix = "aero.singular_matrix";
inline constexpr const char* schema = "schema";
inline constexpr const char* csv_malformed = "csv.malformed";
inline constexpr const char* backend = "backend.transport";
inline constexpr const char* unparseable = "backend.unparseable";
inline constexpr const char* dimension_mismatch = "retrieval.dimension_mismatch";
inline constexpr const char* out_of_space = "agents.out_of_space";
inline constexpr const char* config_invalid = "config.invalid";
inline constexpr const char* run_exists = "run.exists";
inline constexpr const char* run_not_found = "run.not_found";
inline constexpr const char* stage = "run.invalid_stage";
inline constexpr const char* not_paused = "run.not_paused";
inline constexpr const char* decision_invalid = "decision.invalid";
inline constexpr const char* checksum = "events.checksum";
inline constexpr const char* log_corrupt = "events.corrupt";
inline constexpr const char* no_viable = "workflow.no_viable_designs";
inline constexpr const char* budget_exhausted = "workflow.iteration_budget_exhausted";
inline constexpr const char* infeasible_start = "optimize.infeasible_start";
inline constexpr const char* io = "io";
}  // namespace errc

}  // namespace aerodesign
