#include "aerodesign/aero.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>

#include <Eigen/Dense>

#include "aerodesign/error.hpp"
#include "aerodesign/util.hpp"

namespace aerodesign {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr const char* kSolverId = "vortex-panel/schlichting/prandtl-glauert";
constexpr const char* kBeyondValidityTag = "+beyond-validity";

struct Panels {
  std::vector<double> node_x, node_y;  // N + 1 nodes
  std::vector<double> mid_x, mid_y, theta, length;  // N panels
};

Panels build_panels(const AirfoilProfile& profile) {
  const auto& up = profile.upper();
  const auto& lo = profile.lower();
  Panels p;
  for (auto it = lo.rbegin(); it != lo.rend(); ++it) {
    p.node_x.push_back(it->x);
    p.node_y.push_back(it->y);
  }
  for (std::size_t i = 1; i < up.size(); ++i) {
    p.node_x.push_back(up[i].x);
    p.node_y.push_back(up[i].y);
  }
  const std::size_t n = p.node_x.size() - 1;
  p.mid_x.resize(n);
  p.mid_y.resize(n);
  p.theta.resize(n);
  p.length.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double dx = p.node_x[j + 1] - p.node_x[j];
    const double dy = p.node_y[j + 1] - p.node_y[j];
    p.mid_x[j] = 0.5 * (p.node_x[j] + p.node_x[j + 1]);
    p.mid_y[j] = 0.5 * (p.node_y[j] + p.node_y[j + 1]);
    p.theta[j] = std::atan2(dy, dx);
    p.length[j] = std::hypot(dx, dy);
    if (!(p.length[j] > 0.0)) {
      throw Error(errc::geometry_invalid, "zero-length panel");
    }
  }
  return p;
}

}  // namespace

FlowConditions::FlowConditions(double mach, double reynolds, double aoa_deg)
    : mach_(mach), reynolds_(reynolds), aoa_deg_(aoa_deg) {
  if (!std::isfinite(mach) || mach < 0.0 || mach >= 1.0) {
    throw Error(errc::domain, "mach must lie in [0, 1)");
  }
  if (!std::isfinite(reynolds) || reynolds <= 0.0) {
    throw Error(errc::domain, "reynolds must be positive");
  }
  if (!std::isfinite(aoa_deg) || aoa_deg < -20.0 || aoa_deg > 20.0) {
    throw Error(errc::domain, "angle of attack must lie in [-20, 20] degrees");
  }
}

AeroResult AeroResult::make(double cl, double cd, double cm, std::string solver_id,
                            bool beyond_validity) {
  if (!std::isfinite(cl) || !std::isfinite(cd) || !std::isfinite(cm)) {
    throw Error(errc::solver_diverged, "non-finite aerodynamic coefficient");
  }
  if (!(cd > 0.0)) {
    throw Error(errc::solver_diverged, "drag coefficient must be positive");
  }
  return AeroResult{cl, cd, cm, cl / cd, std::move(solver_id), beyond_validity};
}

InviscidResult panel_solve(const AirfoilProfile& profile, double aoa_deg) {
  const Panels p = build_panels(profile);
  const std::size_t n = p.theta.size();
  if (n < kMinPanels) {
    throw Error(errc::domain, "panel_solve: need at least 40 panels");
  }
  const double alpha = aoa_deg * kPi / 180.0;

  // Influence coefficients of the two linear-vorticity end values of panel j
  // on control point i (normal: cn1/cn2, tangential: ct1/ct2).
  Eigen::MatrixXd an = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n + 1),
                                             static_cast<Eigen::Index>(n + 1));
  Eigen::MatrixXd at = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                             static_cast<Eigen::Index>(n + 1));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n + 1));

  std::vector<double> cn1(n), cn2(n), ct1(n), ct2(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        cn1[j] = -1.0;
        cn2[j] = 1.0;
        ct1[j] = 0.5 * kPi;
        ct2[j] = 0.5 * kPi;
        continue;
      }
      const double dx = p.mid_x[i] - p.node_x[j];
      const double dy = p.mid_y[i] - p.node_y[j];
      const double s = p.length[j];
      const double a = -dx * std::cos(p.theta[j]) - dy * std::sin(p.theta[j]);
      const double b = dx * dx + dy * dy;
      const double c = std::sin(p.theta[i] - p.theta[j]);
      const double d = std::cos(p.theta[i] - p.theta[j]);
      const double e = dx * std::sin(p.theta[j]) - dy * std::cos(p.theta[j]);
      const double f = std::log1p(s * (s + 2.0 * a) / b);
      const double g = std::atan2(e * s, b + a * s);
      const double pp = dx * std::sin(p.theta[i] - 2.0 * p.theta[j]) +
                        dy * std::cos(p.theta[i] - 2.0 * p.theta[j]);
      const double qq = dx * std::cos(p.theta[i] - 2.0 * p.theta[j]) -
                        dy * std::sin(p.theta[i] - 2.0 * p.theta[j]);
      cn2[j] = d + 0.5 * qq * f / s - (a * c + d * e) * g / s;
      cn1[j] = 0.5 * d * f + c * g - cn2[j];
      ct2[j] = c + 0.5 * pp * f / s + (a * d - c * e) * g / s;
      ct1[j] = 0.5 * c * f - d * g - ct2[j];
    }
    const auto row = static_cast<Eigen::Index>(i);
    an(row, 0) = cn1[0];
    at(row, 0) = ct1[0];
    for (std::size_t j = 1; j < n; ++j) {
      an(row, static_cast<Eigen::Index>(j)) = cn1[j] + cn2[j - 1];
      at(row, static_cast<Eigen::Index>(j)) = ct1[j] + ct2[j - 1];
    }
    an(row, static_cast<Eigen::Index>(n)) = cn2[n - 1];
    at(row, static_cast<Eigen::Index>(n)) = ct2[n - 1];
    rhs(row) = std::sin(p.theta[i] - alpha);
  }
  // Kutta condition: vorticity vanishes at the trailing edge.
  an(static_cast<Eigen::Index>(n), 0) = 1.0;
  an(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) = 1.0;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(an);
  if (!(lu.rcond() > 1e-13)) {
    throw Error(errc::singular_matrix, "panel system is singular");
  }
  const Eigen::VectorXd gamma = lu.solve(rhs);
  if (!gamma.allFinite()) {
    throw Error(errc::singular_matrix, "panel system produced non-finite vorticity");
  }

  // Lift from the bound circulation; moment from surface pressure.
  double circulation = 0.0;
  double cm = 0.0;
  const Eigen::VectorXd vt = at * gamma;
  for (std::size_t j = 0; j < n; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    circulation += 0.5 * (gamma(jj) + gamma(jj + 1)) * p.length[j];
    const double v = std::cos(p.theta[j] - alpha) + vt(jj);
    const double cp = 1.0 - v * v;
    const double fx = cp * p.length[j] * std::sin(p.theta[j]);
    const double fy = -cp * p.length[j] * std::cos(p.theta[j]);
    cm += -(p.mid_x[j] - 0.25) * fy + p.mid_y[j] * fx;
  }
  const double cl = 2.0 * 2.0 * kPi * circulation;
  if (!std::isfinite(cl) || !std::isfinite(cm)) {
    throw Error(errc::singular_matrix, "panel solution is not finite");
  }
  return InviscidResult{cl, cm};
}

double skin_friction(double reynolds) {
  if (!(reynolds > 1e4)) {
    throw Error(errc::domain, "skin friction correlation needs reynolds > 1e4");
  }
  return 0.455 / std::pow(std::log10(reynolds), 2.58);
}

double form_factor(double thickness_ratio) {
  const double t = thickness_ratio;
  return 1.0 + 2.0 * t + 60.0 * t * t * t * t;
}

double viscous_drag(double thickness_ratio, double reynolds) {
  if (!std::isfinite(thickness_ratio) || thickness_ratio < 0.0) {
    throw Error(errc::domain, "thickness ratio must be non-negative");
  }
  return 2.0 * skin_friction(reynolds) * form_factor(thickness_ratio);
}

double viscous_drag(const AirfoilProfile& profile, double reynolds) {
  return viscous_drag(max_thickness(profile).thickness, reynolds);
}

CompressibleResult compressibility_correction(double cl_inc, double cm_inc, double mach) {
  if (!std::isfinite(mach) || mach < 0.0 || mach >= 1.0) {
    throw Error(errc::domain, "Prandtl-Glauert correction needs 0 <= mach < 1");
  }
  const double factor = 1.0 / std::sqrt(1.0 - mach * mach);
  return CompressibleResult{cl_inc * factor, cm_inc * factor, factor,
                            mach > kPrandtlGlauertValidMach};
}

AeroResult PanelAnalyzer::analyze(const AirfoilProfile& profile,
                                  const FlowConditions& conditions) const {
  InviscidResult inviscid;
  try {
    inviscid = panel_solve(profile, conditions.aoa_deg());
  } catch (const Error& e) {
    if (e.code() == errc::singular_matrix) {
      throw Error(errc::solver_diverged, std::string("solver diverged: ") + e.what());
    }
    throw;
  }
  const double cd = viscous_drag(profile, conditions.reynolds());
  const auto corrected = compressibility_correction(inviscid.cl, inviscid.cm, conditions.mach());
  std::string solver = kSolverId;
  if (corrected.beyond_validity) solver += kBeyondValidityTag;
  return AeroResult::make(corrected.cl, cd, corrected.cm, std::move(solver),
                          corrected.beyond_validity);
}

std::string PanelAnalyzer::id() const { return kSolverId; }

AeroResult analyze(const AirfoilProfile& profile, const FlowConditions& conditions) {
  return PanelAnalyzer{}.analyze(profile, conditions);
}

std::vector<AeroResult> analyze_batch(std::span<const AirfoilProfile> profiles,
                                      const FlowConditions& conditions,
                                      const Analyzer& analyzer, unsigned threads) {
  std::vector<AeroResult> out(profiles.size());
  threads = std::max(1U, threads);
  if (threads == 1 || profiles.size() < 2) {
    for (std::size_t i = 0; i < profiles.size(); ++i) {
      out[i] = analyzer.analyze(profiles[i], conditions);
    }
    return out;
  }
  std::vector<std::future<void>> workers;
  const std::size_t stride = threads;
  for (unsigned w = 0; w < threads; ++w) {
    workers.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < profiles.size(); i += stride) {
        out[i] = analyzer.analyze(profiles[i], conditions);
      }
    }));
  }
  for (auto& f : workers) f.get();
  return out;
}

std::string aero_results_to_csv(std::span<const DesignAero> rows) {
  std::string out = "design_id,cl,cd,cm,l_over_d,solver_id\n";
  for (const auto& r : rows) {
    out += std::to_string(r.design_id) + "," + format_double(r.result.cl) + "," +
           format_double(r.result.cd) + "," + format_double(r.result.cm) + "," +
           format_double(r.result.l_over_d) + "," + r.result.solver_id + "\n";
  }
  return out;
}

}  // namespace aerodesign
