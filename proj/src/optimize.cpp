#include "aerodesign/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "aerodesign/error.hpp"
#include "aerodesign/util.hpp"

namespace aerodesign {

namespace {

using Vec = std::vector<double>;

Vec to_vector(const KulfanParams& k) {
  Vec x = k.upper_weights();
  x.insert(x.end(), k.lower_weights().begin(), k.lower_weights().end());
  x.push_back(k.te_thickness());
  return x;
}

KulfanParams from_vector(const Vec& x, std::size_t n_weights) {
  const auto n = static_cast<std::ptrdiff_t>(n_weights);
  return KulfanParams(Vec(x.begin(), x.begin() + n), Vec(x.begin() + n, x.begin() + 2 * n),
                      x.back());
}

const Analyzer& analyzer_of(const OptimizationProblem& p) {
  static const PanelAnalyzer panel;
  return p.analyzer ? *p.analyzer : panel;
}

// Tracks evaluations and the best feasible point seen so far.
class Search {
 public:
  Search(const OptimizationProblem& problem, std::size_t n_weights)
      : problem_(problem), n_weights_(n_weights) {}

  // Value to minimise: minus the penalised objective.
  double operator()(const Vec& x, double weight, bool* feasible = nullptr) {
    ++evaluations_;
    ObjectiveValue v;
    try {
      v = evaluate_objective(from_vector(x, n_weights_), problem_, weight);
    } catch (const Error& e) {
      v.objective = kRejectedObjective;
      v.rejected = true;
      v.reason = e.what();
    }
    if (feasible) *feasible = v.feasible;
    if (v.feasible && v.l_over_d > best_ld_) {
      best_ld_ = v.l_over_d;
      best_x_ = x;
      best_aero_ = v.aero;
    }
    return -v.objective;
  }

  int evaluations() const { return evaluations_; }
  int remaining() const { return problem_.budget - evaluations_; }
  double best_ld() const { return best_ld_; }
  const Vec& best_x() const { return best_x_; }
  const std::optional<AeroResult>& best_aero() const { return best_aero_; }

 private:
  const OptimizationProblem& problem_;
  std::size_t n_weights_;
  int evaluations_ = 0;
  double best_ld_ = -std::numeric_limits<double>::infinity();
  Vec best_x_;
  std::optional<AeroResult> best_aero_;
};

struct Vertex {
  Vec x;
  double g = 0.0;
  bool feasible = false;
};

void nelder_mead(Search& search, Vec start, double weight, int share, std::mt19937_64& rng,
                 int restart, std::vector<TrajectoryPoint>& trajectory) {
  const std::size_t d = start.size();
  const int stop_at = search.evaluations() + share;
  const double shrink_scale = std::pow(0.5, restart);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Vertex> simplex;
  Vertex first{start, 0.0, false};
  first.g = search(start, weight, &first.feasible);
  simplex.push_back(first);
  for (std::size_t i = 0; i < d && search.evaluations() < stop_at; ++i) {
    Vec x = start;
    const bool te = i + 1 == d;
    double step = (te ? 5e-4 : 0.03) * shrink_scale;
    if (restart > 0) step *= (0.5 + unit(rng)) * (unit(rng) < 0.5 ? -1.0 : 1.0);
    x[i] += step;
    Vertex v{x, 0.0, false};
    v.g = search(x, weight, &v.feasible);
    simplex.push_back(std::move(v));
  }
  if (simplex.size() != d + 1) return;

  auto eval = [&](const Vec& x) {
    Vertex v{x, 0.0, false};
    v.g = search(x, weight, &v.feasible);
    return v;
  };
  auto combine = [&](const Vec& a, const Vec& b, double t) {  // a + t (b - a)
    Vec out(d);
    for (std::size_t k = 0; k < d; ++k) out[k] = a[k] + t * (b[k] - a[k]);
    return out;
  };

  while (search.evaluations() + 2 <= stop_at) {
    std::stable_sort(simplex.begin(), simplex.end(),
                     [](const Vertex& a, const Vertex& b) { return a.g < b.g; });
    trajectory.push_back({static_cast<int>(trajectory.size()), search.best_ld(),
                          simplex.front().feasible});

    double size = 0.0;
    for (std::size_t i = 1; i <= d; ++i) {
      for (std::size_t k = 0; k < d; ++k) {
        size = std::max(size, std::abs(simplex[i].x[k] - simplex[0].x[k]));
      }
    }
    const double spread = std::abs(simplex.back().g - simplex.front().g);
    if (size < 1e-10 || (spread < 1e-13 * (1.0 + std::abs(simplex.front().g)) && size < 1e-7)) {
      break;
    }

    Vec centroid(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t k = 0; k < d; ++k) centroid[k] += simplex[i].x[k] / static_cast<double>(d);
    }
    Vertex& worst = simplex.back();
    const Vertex reflected = eval(combine(centroid, worst.x, -1.0));
    if (reflected.g < simplex.front().g) {
      const Vertex expanded = eval(combine(centroid, worst.x, -2.0));
      worst = expanded.g < reflected.g ? expanded : reflected;
      continue;
    }
    if (reflected.g < simplex[d - 1].g) {
      worst = reflected;
      continue;
    }
    const bool outside = reflected.g < worst.g;
    const Vertex contracted = eval(combine(centroid, worst.x, outside ? -0.5 : 0.5));
    if (contracted.g < (outside ? reflected.g : worst.g)) {
      worst = contracted;
      continue;
    }
    for (std::size_t i = 1; i <= d && search.evaluations() < stop_at; ++i) {
      simplex[i] = eval(combine(simplex[0].x, simplex[i].x, 0.5));
    }
  }
}

}  // namespace

std::vector<double> default_thickness_stations() {
  std::vector<double> s{0.01, 0.05};
  for (int i = 1; i <= 9; ++i) s.push_back(0.1 * i);
  s.push_back(0.95);
  return s;
}

void OptimizationProblem::validate() const {
  if (!(min_local_thickness > 0.0) || !(min_te_thickness > 0.0)) {
    throw Error(errc::config_invalid, "thickness constraints must be positive");
  }
  if (budget < 50) throw Error(errc::config_invalid, "optimizer budget must be at least 50");
  if (restarts < 1) throw Error(errc::config_invalid, "optimizer needs at least one restart");
  if (n_points < 10) throw Error(errc::config_invalid, "optimizer n_points must be at least 10");
  if (penalty_schedule.empty()) throw Error(errc::config_invalid, "empty penalty schedule");
  for (double x : stations) {
    if (!(x > 0.0 && x <= 1.0)) throw Error(errc::config_invalid, "audit station outside (0, 1]");
  }
}

double constraint_penalty(const KulfanParams& params, const OptimizationProblem& problem,
                          double weight) {
  double sum = 0.0;
  for (double x : problem.stations) {
    const double t = kulfan_upper_y(params, x) - kulfan_lower_y(params, x);
    const double v = std::max(0.0, problem.min_local_thickness - t);
    sum += v * v;
  }
  const double te = std::max(0.0, problem.min_te_thickness - params.te_thickness());
  sum += te * te;
  return sum * weight;
}

ObjectiveValue evaluate_objective(const KulfanParams& params, const OptimizationProblem& problem,
                                  double weight) {
  ObjectiveValue out;
  out.penalty = constraint_penalty(params, problem, weight);
  try {
    const AirfoilProfile profile = from_kulfan(params, problem.n_points);
    AeroResult r = analyzer_of(problem).analyze(profile, problem.conditions);
    out.l_over_d = r.l_over_d;
    out.objective = r.l_over_d - out.penalty;
    out.feasible = audit_constraints(params, problem).all_ok();
    out.aero = std::move(r);
  } catch (const Error& e) {
    out.objective = kRejectedObjective;
    out.rejected = true;
    out.feasible = false;
    out.reason = e.what();
  }
  return out;
}

bool ConstraintAudit::all_ok() const {
  return te_ok && std::all_of(stations.begin(), stations.end(),
                              [](const StationAudit& s) { return s.ok; });
}

ConstraintAudit audit_constraints(const KulfanParams& params, const OptimizationProblem& problem) {
  ConstraintAudit a;
  for (double x : problem.stations) {
    const double t = kulfan_upper_y(params, x) - kulfan_lower_y(params, x);
    a.stations.push_back({x, t, problem.min_local_thickness, t >= problem.min_local_thickness});
  }
  a.te_thickness = params.te_thickness();
  a.te_minimum = problem.min_te_thickness;
  a.te_ok = a.te_thickness >= a.te_minimum;
  return a;
}

OptimizationResult optimize_ld(const OptimizationProblem& problem) {
  problem.validate();
  KulfanParams start = problem.initial;
  bool repaired = false;
  auto audit = audit_constraints(start, problem);
  if (!audit.te_ok) {
    start = KulfanParams(start.upper_weights(), start.lower_weights(), problem.min_te_thickness);
    repaired = true;
    audit = audit_constraints(start, problem);
  }
  if (!audit.all_ok()) {
    throw Error(errc::infeasible_start,
                "infeasible start, unrepairable: local thickness below the floor");
  }
  const auto initial_value = evaluate_objective(start, problem, problem.penalty_schedule.front());
  if (initial_value.rejected) {
    throw Error(errc::infeasible_start, "initial design cannot be analysed: " + initial_value.reason);
  }

  const std::size_t n_weights = start.upper_weights().size();
  Search search(problem, n_weights);
  std::vector<TrajectoryPoint> trajectory;
  std::mt19937_64 rng(problem.seed);
  search(to_vector(start), problem.penalty_schedule.front());
  trajectory.push_back({0, search.best_ld(), true});

  for (int r = 0; r < problem.restarts && search.remaining() > 0; ++r) {
    const double weight =
        problem.penalty_schedule[std::min<std::size_t>(r, problem.penalty_schedule.size() - 1)];
    const int share = search.remaining() / (problem.restarts - r);
    nelder_mead(search, search.best_x(), weight, share, rng, r, trajectory);
  }

  const KulfanParams best = from_vector(search.best_x(), n_weights);
  const bool improved = search.best_ld() > initial_value.l_over_d;
  OptimizationResult out{
      start,
      best,
      from_kulfan(best, problem.n_points),
      *initial_value.aero,
      improved ? *search.best_aero() : *initial_value.aero,
      std::move(trajectory),
      audit_constraints(best, problem),
      search.evaluations(),
      improved,
      repaired,
      {}};
  if (repaired) out.warnings.push_back("trailing-edge thickness padded to the floor");
  if (!improved) out.warnings.push_back("budget exhausted without improvement");
  return out;
}

std::string trajectory_to_csv(std::span<const TrajectoryPoint> trajectory) {
  std::string out = "iteration,best_l_over_d,feasible\n";
  for (const auto& p : trajectory) {
    out += std::to_string(p.iteration) + "," + format_double(p.best_l_over_d) + "," +
           (p.feasible ? "true" : "false") + "\n";
  }
  return out;
}

}  // namespace aerodesign
