#include <doctest.h>

#include <variant>

#include "aerodesign/error.hpp"
#include "aerodesign/optimize.hpp"
#include "../support/synthetic.hpp"

using namespace aerodesign;

TEST_SUITE("optimize") {
  TEST_CASE("penalty is zero inside the feasible region and grows outside") {
    const auto k = to_kulfan(generate_naca4(DesignParams(0.02, 0.4, 0.12), 200)).params;
    OptimizationProblem problem{k};
    CHECK(constraint_penalty(k, problem, 1e6) == 0.0);
    const KulfanParams thin(k.upper_weights(), k.lower_weights(), 0.0);
    CHECK(constraint_penalty(thin, problem, 1e6) == doctest::Approx(1e6 * 0.0015 * 0.0015));
    CHECK_FALSE(audit_constraints(thin, problem).te_ok);
    const auto audit = audit_constraints(k, problem);
    CHECK(audit.stations.size() == default_thickness_stations().size());
    CHECK(audit.all_ok());
  }

  TEST_CASE("problem validation") {
    const auto k = to_kulfan(generate_naca4(DesignParams(0.02, 0.4, 0.12), 200)).params;
    OptimizationProblem p{k};
    p.budget = 10;
    CHECK_THROWS_AS(p.validate(), Error);
    p.budget = 100;
    p.min_te_thickness = 0.0;
    CHECK_THROWS_AS(p.validate(), Error);
  }

  TEST_CASE("maximises a synthetic concave objective") {
    const auto k = to_kulfan(generate_naca4(DesignParams(0.02, 0.4, 0.12), 200), 4).params;
    const testing_support::QuadraticAnalyzer analyzer(k, 0.01);
    OptimizationProblem p{k};
    p.analyzer = &analyzer;
    p.budget = 3000;
    const auto r = optimize_ld(p);
    CHECK(r.improved);
    CHECK(r.final_aero.l_over_d == doctest::Approx(analyzer.peak()).epsilon(1e-3));
    CHECK(r.evaluations <= p.budget);
    for (std::size_t i = 1; i < r.trajectory.size(); ++i) {
      CHECK(r.trajectory[i].best_l_over_d >= r.trajectory[i - 1].best_l_over_d);
    }
    CHECK(r.audit.all_ok());
    CHECK(trajectory_to_csv(r.trajectory).rfind("iteration,best_l_over_d,feasible\n", 0) == 0);
  }

  TEST_CASE("thin trailing edge is padded and infeasible starts rejected") {
    const auto k = to_kulfan(generate_naca4(DesignParams(0.02, 0.4, 0.12), 200), 4).params;
    const testing_support::QuadraticAnalyzer analyzer(k, 0.0);
    OptimizationProblem p{KulfanParams(k.upper_weights(), k.lower_weights(), 0.0)};
    p.analyzer = &analyzer;
    p.budget = 60;
    const auto r = optimize_ld(p);
    CHECK(r.repaired_start);
    CHECK(r.initial.te_thickness() == p.min_te_thickness);
    p.min_local_thickness = 0.5;
    try {
      optimize_ld(p);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == errc::infeasible_start);
    }
  }

  TEST_CASE("panel optimisation improves L/D and respects constraints") {
    const auto k = to_kulfan(generate_naca4(DesignParams(0.05, 0.4, 0.14), 200), 4).params;
    OptimizationProblem p{k};
    p.budget = 200;
    p.n_points = 60;
    const auto r = optimize_ld(p);
    CHECK(r.final_aero.l_over_d >= r.initial_aero.l_over_d);
    CHECK(r.audit.all_ok());
    CHECK(r.evaluations <= 200);
  }
}
