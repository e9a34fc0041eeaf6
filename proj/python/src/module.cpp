#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "aerodesign/aero.hpp"
#include "aerodesign/cli.hpp"
#include "aerodesign/error.hpp"
#include "aerodesign/geometry.hpp"
#include "aerodesign/optimize.hpp"
#include "aerodesign/render.hpp"
#include "aerodesign/sampling.hpp"

namespace py = pybind11;
using namespace aerodesign;

namespace {

py::dict profile_dict(const AirfoilProfile& p) {
  std::vector<std::pair<double, double>> upper, lower;
  for (const auto& pt : p.upper()) upper.emplace_back(pt.x, pt.y);
  for (const auto& pt : p.lower()) lower.emplace_back(pt.x, pt.y);
  py::dict d;
  d["upper"] = upper;
  d["lower"] = lower;
  return d;
}

py::dict aero_dict(const AeroResult& r) {
  py::dict d;
  d["cl"] = r.cl;
  d["cd"] = r.cd;
  d["cm"] = r.cm;
  d["l_over_d"] = r.l_over_d;
  d["solver_id"] = r.solver_id;
  d["beyond_validity"] = r.beyond_validity;
  return d;
}

py::dict kulfan_dict(const KulfanParams& k) {
  py::dict d;
  d["upper"] = k.upper_weights();
  d["lower"] = k.lower_weights();
  d["te_thickness"] = k.te_thickness();
  return d;
}

SampleStrategy strategy(const std::string& kind, std::optional<std::uint64_t> seed, std::uint64_t skip) {
  return SampleStrategy{sample_kind_from_string(kind), seed, skip};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "NACA/Kulfan airfoil geometry, panel analysis, sampling and L/D optimisation";

  static py::exception<Error> error_type(m, "AerodesignError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error_type, (e.code() + ": " + e.what()).c_str());
    }
  });

  m.def(
      "thickness_at", [](double x, double t) { return thickness_at(x, t); }, py::arg("x"), py::arg("t"));

  m.def(
      "naca4",
      [](double max_camber, double camber_location, double max_thickness, std::size_t n) {
        return profile_dict(generate_naca4(DesignParams(max_camber, camber_location, max_thickness), n));
      },
      py::arg("max_camber"), py::arg("camber_location"), py::arg("max_thickness"), py::arg("n") = 200);

  m.def(
      "analyze",
      [](double max_camber, double camber_location, double max_thickness, double mach,
         double reynolds, double aoa_deg, std::size_t n) {
        const auto profile =
            generate_naca4(DesignParams(max_camber, camber_location, max_thickness), n);
        return aero_dict(analyze(profile, FlowConditions(mach, reynolds, aoa_deg)));
      },
      py::arg("max_camber"), py::arg("camber_location"), py::arg("max_thickness"),
      py::arg("mach") = 0.8, py::arg("reynolds") = 5e6, py::arg("aoa_deg") = 0.0, py::arg("n") = 200);

  m.def(
      "kulfan_fit",
      [](double max_camber, double camber_location, double max_thickness, int degree) {
        const auto fit =
            to_kulfan(generate_naca4(DesignParams(max_camber, camber_location, max_thickness)), degree);
        py::dict d = kulfan_dict(fit.params);
        d["max_residual"] = fit.max_residual;
        d["rms_residual"] = fit.rms_residual;
        return d;
      },
      py::arg("max_camber"), py::arg("camber_location"), py::arg("max_thickness"), py::arg("degree") = 8);

  m.def(
      "kulfan_profile",
      [](std::vector<double> upper, std::vector<double> lower, double te, std::size_t n) {
        return profile_dict(from_kulfan(KulfanParams(std::move(upper), std::move(lower), te), n));
      },
      py::arg("upper"), py::arg("lower"), py::arg("te_thickness") = 0.0, py::arg("n") = 200);

  m.def(
      "sample",
      [](std::size_t n, const std::string& kind, std::optional<std::uint64_t> seed, std::uint64_t skip) {
        std::vector<std::array<double, 3>> out;
        for (const auto& p : sample(DesignSpace(), strategy(kind, seed, skip), n)) out.push_back(p.as_array());
        return out;
      },
      py::arg("n"), py::arg("kind") = "latin_hypercube", py::arg("seed") = py::none(), py::arg("skip") = 0);

  m.def(
      "discrepancy",
      [](const std::vector<std::array<double, 3>>& points) { return l2_star_discrepancy(points); },
      py::arg("points"));

  m.def(
      "render_svg",
      [](double max_camber, double camber_location, double max_thickness) {
        return render_profile(generate_naca4(DesignParams(max_camber, camber_location, max_thickness)));
      },
      py::arg("max_camber"), py::arg("camber_location"), py::arg("max_thickness"));

  m.def(
      "optimize",
      [](double max_camber, double camber_location, double max_thickness, int budget, std::uint64_t seed) {
        const auto fit =
            to_kulfan(generate_naca4(DesignParams(max_camber, camber_location, max_thickness)));
        OptimizationProblem problem{fit.params};
        problem.budget = budget;
        problem.seed = seed;
        std::optional<OptimizationResult> result;
        {
          py::gil_scoped_release release;
          result = optimize_ld(problem);
        }
        const OptimizationResult& r = *result;
        std::vector<double> trajectory;
        for (const auto& t : r.trajectory) trajectory.push_back(t.best_l_over_d);
        py::dict d;
        d["initial"] = kulfan_dict(r.initial);
        d["optimized"] = kulfan_dict(r.optimized);
        d["initial_aero"] = aero_dict(r.initial_aero);
        d["final_aero"] = aero_dict(r.final_aero);
        d["trajectory"] = trajectory;
        d["evaluations"] = r.evaluations;
        d["improved"] = r.improved;
        d["constraints_ok"] = r.audit.all_ok();
        d["warnings"] = r.warnings;
        return d;
      },
      py::arg("max_camber") = 0.05, py::arg("camber_location") = 0.4, py::arg("max_thickness") = 0.14,
      py::arg("budget") = 1500, py::arg("seed") = 0);

  m.def(
      "cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "aerodesign");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the aerodesign command line; returns (exit_code, stdout, stderr).");
}
