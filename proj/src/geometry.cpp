#include "aerodesign/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "aerodesign/error.hpp"
#include "aerodesign/util.hpp"

namespace aerodesign {

namespace {

constexpr double kStationTol = 1e-12;
constexpr double kDegenerateThickness = 1e-9;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw Error(errc::domain, std::string(what) + " must be finite");
  }
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return r;
}

double bernstein(int n, int i, double x) {
  return binomial(n, i) * std::pow(x, i) * std::pow(1.0 - x, n - i);
}

double class_function(double x) { return std::sqrt(x) * (1.0 - x); }

double cst_surface(const std::vector<double>& w, double x) {
  const int n = static_cast<int>(w.size()) - 1;
  double shape = 0.0;
  for (int i = 0; i <= n; ++i) {
    shape += w[static_cast<std::size_t>(i)] * bernstein(n, i, x);
  }
  return class_function(x) * shape;
}

}  // namespace

DesignParams::DesignParams(double max_camber, double camber_location, double max_thickness)
    : max_camber_(max_camber), camber_location_(camber_location), max_thickness_(max_thickness) {
  require_finite(max_camber, "max_camber");
  require_finite(camber_location, "camber_location");
  require_finite(max_thickness, "max_thickness");
}

KulfanParams::KulfanParams(std::vector<double> upper_weights, std::vector<double> lower_weights,
                           double te_thickness)
    : upper_(std::move(upper_weights)), lower_(std::move(lower_weights)),
      te_thickness_(te_thickness) {
  if (upper_.size() != lower_.size()) {
    throw Error(errc::domain, "upper and lower Kulfan weights differ in length");
  }
  if (upper_.size() < 3) {
    throw Error(errc::domain, "Kulfan degree must be at least 2");
  }
  for (double w : upper_) require_finite(w, "Kulfan weight");
  for (double w : lower_) require_finite(w, "Kulfan weight");
  require_finite(te_thickness, "te_thickness");
  if (te_thickness < 0.0) {
    throw Error(errc::domain, "te_thickness must be non-negative");
  }
}

AirfoilProfile::AirfoilProfile(std::vector<Point2> upper, std::vector<Point2> lower,
                               Provenance provenance)
    : upper_(std::move(upper)), lower_(std::move(lower)), provenance_(std::move(provenance)) {
  if (upper_.size() != lower_.size() || upper_.size() < 3) {
    throw Error(errc::geometry_invalid,
                "surfaces need the same number of points (at least 3)");
  }
  for (const auto* surface : {&upper_, &lower_}) {
    for (std::size_t i = 0; i < surface->size(); ++i) {
      const Point2& p = (*surface)[i];
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw Error(errc::geometry_invalid, "non-finite coordinate");
      }
      if (p.x < 0.0 || p.x > 1.0) {
        throw Error(errc::geometry_invalid, "x outside [0, 1]");
      }
      if (i > 0 && !(p.x > (*surface)[i - 1].x)) {
        throw Error(errc::geometry_invalid, "x not strictly increasing along surface");
      }
    }
  }
  if (std::abs(upper_.front().x) >= kStationTol ||
      std::abs(upper_.front().y - lower_.front().y) >= kStationTol) {
    throw Error(errc::geometry_invalid, "surfaces must share the leading-edge point at x = 0");
  }
  double thickest = 0.0;
  for (std::size_t i = 0; i < upper_.size(); ++i) {
    if (std::abs(upper_[i].x - lower_[i].x) > kStationTol) {
      throw Error(errc::geometry_invalid, "surfaces must share x stations");
    }
    const double t = upper_[i].y - lower_[i].y;
    if (t < -kStationTol) {
      throw Error(errc::geometry_self_intersecting,
                  "upper surface below lower surface at x = " + format_double(upper_[i].x));
    }
    thickest = std::max(thickest, t);
  }
  if (thickest <= kDegenerateThickness) {
    throw Error(errc::geometry_degenerate, "degenerate geometry: zero thickness everywhere");
  }
}

double thickness_at(double x, double max_thickness, TrailingEdge te) {
  if (!std::isfinite(x) || !std::isfinite(max_thickness)) {
    throw Error(errc::domain, "thickness_at: non-finite input");
  }
  if (x < 0.0 || x > 1.0) {
    throw Error(errc::domain, "thickness_at: x outside [0, 1]");
  }
  if (!(max_thickness > 0.0)) {
    throw Error(errc::domain, "thickness_at: thickness must be positive");
  }
  // Near the trailing edge the terms cancel to ~1% of their size, so the sum
  // is carried in extended precision to keep the result within an ulp or two.
  using ld = long double;
  const ld k4 = te == TrailingEdge::open ? -0.1015 : -0.1036;
  const ld lx = x;
  const ld poly = lx * (ld(-0.1260) + lx * (ld(-0.3516) + lx * (ld(0.2843) + lx * k4)));
  return static_cast<double>(ld(5.0) * max_thickness * (ld(0.2969) * std::sqrt(lx) + poly));
}

CamberPoint camber_at(double x, double max_camber, double camber_location) {
  const double m = max_camber;
  const double p = camber_location;
  if (!std::isfinite(x) || !std::isfinite(m) || !std::isfinite(p)) {
    throw Error(errc::domain, "camber_at: non-finite input");
  }
  if (x < 0.0 || x > 1.0) throw Error(errc::domain, "camber_at: x outside [0, 1]");
  if (!(p > 0.0 && p < 1.0)) throw Error(errc::domain, "camber_at: location outside (0, 1)");
  if (m < 0.0) throw Error(errc::domain, "camber_at: negative camber");

  if (x <= p) {
    const double k = m / (p * p);
    return {k * (2.0 * p * x - x * x), 2.0 * k * (p - x)};
  }
  const double q = 1.0 - p;
  const double k = m / (q * q);
  return {k * ((1.0 - 2.0 * p) + 2.0 * p * x - x * x), 2.0 * k * (p - x)};
}

std::vector<double> cosine_stations(std::size_t n) {
  if (n < 2) throw Error(errc::domain, "need at least two stations");
  std::vector<double> xs(n);
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = 0.5 * (1.0 - std::cos(std::numbers::pi * static_cast<double>(i) / denom));
  }
  xs.front() = 0.0;
  xs.back() = 1.0;
  return xs;
}

AirfoilProfile generate_naca4(const DesignParams& params, std::size_t n_per_surface,
                              TrailingEdge te) {
  if (n_per_surface < 10) {
    throw Error(errc::domain, "generate_naca4: need at least 10 points per surface");
  }
  const double m = params.max_camber();
  const double p = params.camber_location();
  const double t = params.max_thickness();
  if (m < 0.0 || !(p > 0.0 && p < 1.0) || !(t > 0.0)) {
    throw Error(errc::domain, "generate_naca4: parameters outside the 4-digit family");
  }

  const auto xs = cosine_stations(n_per_surface);
  std::vector<Point2> upper(n_per_surface);
  std::vector<Point2> lower(n_per_surface);
  for (std::size_t i = 0; i < n_per_surface; ++i) {
    const double x = xs[i];
    const double yt = thickness_at(x, t, te);
    const double yc = camber_at(x, m, p).y;
    upper[i] = {x, yc + yt};
    lower[i] = {x, yc - yt};
  }
  return AirfoilProfile(std::move(upper), std::move(lower), params);
}

double kulfan_upper_y(const KulfanParams& params, double x) {
  return cst_surface(params.upper_weights(), x) + 0.5 * x * params.te_thickness();
}

double kulfan_lower_y(const KulfanParams& params, double x) {
  return cst_surface(params.lower_weights(), x) - 0.5 * x * params.te_thickness();
}

KulfanFit to_kulfan(const AirfoilProfile& profile, int degree) {
  if (degree < 2 || degree > 12) {
    throw Error(errc::domain, "to_kulfan: degree must be in [2, 12]");
  }
  const auto& up = profile.upper();
  const auto& lo = profile.lower();
  const double te = std::max(0.0, up.back().y - lo.back().y);

  auto fit_surface = [&](const std::vector<Point2>& pts, double te_sign) {
    const auto rows = static_cast<Eigen::Index>(pts.size());
    const auto cols = static_cast<Eigen::Index>(degree + 1);
    Eigen::MatrixXd a(rows, cols);
    Eigen::VectorXd b(rows);
    for (Eigen::Index j = 0; j < rows; ++j) {
      const double x = pts[static_cast<std::size_t>(j)].x;
      const double c = class_function(x);
      for (Eigen::Index i = 0; i < cols; ++i) {
        a(j, i) = c * bernstein(degree, static_cast<int>(i), x);
      }
      b(j) = pts[static_cast<std::size_t>(j)].y - te_sign * 0.5 * x * te;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < cols) {
      throw Error(errc::fit_failed, "to_kulfan: singular least-squares system");
    }
    const Eigen::VectorXd w = qr.solve(b);
    if (!w.allFinite()) {
      throw Error(errc::fit_failed, "to_kulfan: non-finite weights");
    }
    return std::vector<double>(w.data(), w.data() + w.size());
  };

  KulfanParams params(fit_surface(up, 1.0), fit_surface(lo, -1.0), te);

  double max_res = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < up.size(); ++i) {
    const double du = kulfan_upper_y(params, up[i].x) - up[i].y;
    const double dl = kulfan_lower_y(params, lo[i].x) - lo[i].y;
    max_res = std::max({max_res, std::abs(du), std::abs(dl)});
    sum_sq += du * du + dl * dl;
  }
  const double rms = std::sqrt(sum_sq / static_cast<double>(2 * up.size()));
  return KulfanFit{std::move(params), max_res, rms};
}

AirfoilProfile from_kulfan(const KulfanParams& params, std::size_t n_per_surface) {
  if (n_per_surface < 10) {
    throw Error(errc::domain, "from_kulfan: need at least 10 points per surface");
  }
  const auto xs = cosine_stations(n_per_surface);
  std::vector<Point2> upper(n_per_surface);
  std::vector<Point2> lower(n_per_surface);
  for (std::size_t i = 0; i < n_per_surface; ++i) {
    upper[i] = {xs[i], kulfan_upper_y(params, xs[i])};
    lower[i] = {xs[i], kulfan_lower_y(params, xs[i])};
  }
  return AirfoilProfile(std::move(upper), std::move(lower), params);
}

double local_thickness(const AirfoilProfile& profile, double x) {
  if (!std::isfinite(x) || x < 0.0 || x > 1.0) {
    throw Error(errc::domain, "local_thickness: x outside [0, 1]");
  }
  const auto& up = profile.upper();
  const auto& lo = profile.lower();
  auto it = std::lower_bound(up.begin(), up.end(), x,
                             [](const Point2& p, double v) { return p.x < v; });
  if (it == up.end()) {
    return up.back().y - lo.back().y;
  }
  const auto i = static_cast<std::size_t>(it - up.begin());
  if (it->x == x || i == 0) {
    return up[i].y - lo[i].y;
  }
  const double x0 = up[i - 1].x;
  const double x1 = up[i].x;
  const double s = (x - x0) / (x1 - x0);
  const double t0 = up[i - 1].y - lo[i - 1].y;
  const double t1 = up[i].y - lo[i].y;
  return t0 + s * (t1 - t0);
}

ThicknessPeak max_thickness(const AirfoilProfile& profile) {
  ThicknessPeak peak;
  const auto& up = profile.upper();
  const auto& lo = profile.lower();
  for (std::size_t i = 0; i < up.size(); ++i) {
    const double t = up[i].y - lo[i].y;
    if (t > peak.thickness) {
      peak = {up[i].x, t};
    }
  }
  return peak;
}

std::string profile_to_csv(const AirfoilProfile& profile) {
  std::string out = "x,y,surface\n";
  for (const auto& p : profile.upper()) {
    out += format_double(p.x) + "," + format_double(p.y) + ",upper\n";
  }
  for (const auto& p : profile.lower()) {
    out += format_double(p.x) + "," + format_double(p.y) + ",lower\n";
  }
  return out;
}

std::string profile_to_selig(const AirfoilProfile& profile, const std::string& name) {
  std::string out = name + "\n";
  const auto& up = profile.upper();
  const auto& lo = profile.lower();
  for (auto it = up.rbegin(); it != up.rend(); ++it) {
    out += "  " + format_fixed(it->x, 8) + "  " + format_fixed(it->y, 8) + "\n";
  }
  for (std::size_t i = 1; i < lo.size(); ++i) {
    out += "  " + format_fixed(lo[i].x, 8) + "  " + format_fixed(lo[i].y, 8) + "\n";
  }
  return out;
}

}  // namespace aerodesign
