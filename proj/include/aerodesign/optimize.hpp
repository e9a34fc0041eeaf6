#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aerodesign/aero.hpp"
#include "aerodesign/geometry.hpp"

namespace aerodesign {

// Audit stations for the local-thickness constraint.
std::vector<double> default_thickness_stations();  // 0.01, 0.05, 0.10, ..., 0.95

struct OptimizationProblem {
  KulfanParams initial;
  FlowConditions conditions{0.8, 5e6, 0.0};
  double min_local_thickness = 0.005;
  double min_te_thickness = 0.0015;
  std::vector<double> stations = default_thickness_stations();
  int budget = 1500;              // objective evaluations, >= 50
  std::size_t n_points = 100;     // points per surface for analysis
  std::uint64_t seed = 0;
  int restarts = 3;
  // Penalty weight used by successive restarts (the last entry repeats).
  std::vector<double> penalty_schedule{1e6, 1e7, 1e8};
  const Analyzer* analyzer = nullptr;  // null means PanelAnalyzer

  // Throws Error(config.invalid) unless constraints are positive, budget >= 50
  // and restarts >= 1.
  void validate() const;
};

struct ObjectiveValue {
  double objective = 0.0;  // l_over_d - penalty, or the sentinel
  double l_over_d = 0.0;
  double penalty = 0.0;
  bool feasible = false;
  bool rejected = false;   // geometry or solver rejected the point
  std::string reason;
  std::optional<AeroResult> aero;
};

inline constexpr double kRejectedObjective = -1e12;

double constraint_penalty(const KulfanParams& params, const OptimizationProblem& problem,
                          double weight);

// from_kulfan -> analyze -> L/D minus sum(max(0, violation)^2) * weight.
// Geometry or solver rejection yields kRejectedObjective, never an exception.
ObjectiveValue evaluate_objective(const KulfanParams& params, const OptimizationProblem& problem,
                                  double weight);

struct StationAudit {
  double x = 0.0;
  double thickness = 0.0;
  double minimum = 0.0;
  bool ok = false;
};

struct ConstraintAudit {
  std::vector<StationAudit> stations;
  double te_thickness = 0.0;
  double te_minimum = 0.0;
  bool te_ok = false;
  bool all_ok() const;
};

ConstraintAudit audit_constraints(const KulfanParams& params, const OptimizationProblem& problem);

struct TrajectoryPoint {
  int iteration = 0;
  double best_l_over_d = 0.0;
  bool feasible = false;
};

struct OptimizationResult {
  KulfanParams initial;
  KulfanParams optimized;
  AirfoilProfile optimized_profile;
  AeroResult initial_aero;
  AeroResult final_aero;
  std::vector<TrajectoryPoint> trajectory;
  ConstraintAudit audit;
  int evaluations = 0;
  bool improved = false;
  bool repaired_start = false;  // TE thickness was padded up to the floor
  std::vector<std::string> warnings;
};

// Seeded Nelder-Mead with restarts over the Kulfan weights and TE thickness.
// Returns the best feasible point found; the start is returned (flagged
// "budget exhausted without improvement") when nothing better turns up.
// Throws Error(optimize.infeasible_start) when the start violates the local
// thickness floor.
OptimizationResult optimize_ld(const OptimizationProblem& problem);

// `iteration,best_l_over_d,feasible`
std::string trajectory_to_csv(std::span<const TrajectoryPoint> trajectory);

}  // namespace aerodesign
