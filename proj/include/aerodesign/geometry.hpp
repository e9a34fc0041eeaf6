#pragma once

#include <array>
#include <string>
#include <variant>
#include <vector>

namespace aerodesign {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Shape parameters of a 4-digit NACA section, all as fractions of chord.
/// Construction only checks finiteness; membership in a design space is a
/// separate question answered by DesignSpace::contains.
class DesignParams {
 public:
  DesignParams(double max_camber, double camber_location, double max_thickness);

  double max_camber() const noexcept { return max_camber_; }
  double camber_location() const noexcept { return camber_location_; }
  double max_thickness() const noexcept { return max_thickness_; }
  std::array<double, 3> as_array() const noexcept {
    return {max_camber_, camber_location_, max_thickness_};
  }

  friend bool operator==(const DesignParams&, const DesignParams&) = default;

 private:
  double max_camber_;
  double camber_location_;
  double max_thickness_;
};

/// Class-shape-transformation (Kulfan) coefficients for both surfaces.
/// The trailing-edge gap is split evenly between the surfaces.
class KulfanParams {
 public:
  KulfanParams(std::vector<double> upper_weights, std::vector<double> lower_weights,
               double te_thickness);

  const std::vector<double>& upper_weights() const noexcept { return upper_; }
  const std::vector<double>& lower_weights() const noexcept { return lower_; }
  double te_thickness() const noexcept { return te_thickness_; }
  int degree() const noexcept { return static_cast<int>(upper_.size()) - 1; }

  friend bool operator==(const KulfanParams&, const KulfanParams&) = default;

 private:
  std::vector<double> upper_;
  std::vector<double> lower_;
  double te_thickness_;
};

using Provenance = std::variant<DesignParams, KulfanParams>;

/// Chord-normalised section geometry. Both surfaces run leading edge to
/// trailing edge over the same x stations and share the leading-edge point.
/// The constructor enforces every invariant, so a live AirfoilProfile is
/// always analysable.
class AirfoilProfile {
 public:
  AirfoilProfile(std::vector<Point2> upper, std::vector<Point2> lower, Provenance provenance);

  const std::vector<Point2>& upper() const noexcept { return upper_; }
  const std::vector<Point2>& lower() const noexcept { return lower_; }
  std::size_t n_per_surface() const noexcept { return upper_.size(); }
  const Provenance& provenance() const noexcept { return provenance_; }

  friend bool operator==(const AirfoilProfile&, const AirfoilProfile&) = default;

 private:
  std::vector<Point2> upper_;
  std::vector<Point2> lower_;
  Provenance provenance_;
};

enum class TrailingEdge { open, closed };

struct CamberPoint {
  double y = 0.0;
  double slope = 0.0;
};

// Half thickness of the 4-digit thickness distribution at chord fraction x.
// The open form uses -0.1015 for the quartic coefficient, the closed form
// -0.1036 (which brings y_t(1) to ~0).
double thickness_at(double x, double max_thickness, TrailingEdge te = TrailingEdge::open);

// Two-piece parabolic 4-digit mean line and its slope.
CamberPoint camber_at(double x, double max_camber, double camber_location);

// Cosine-spaced chord stations, x[0] = 0 and x[n-1] = 1 exactly.
std::vector<double> cosine_stations(std::size_t n);

AirfoilProfile generate_naca4(const DesignParams& params, std::size_t n_per_surface = 200,
                              TrailingEdge te = TrailingEdge::open);

struct KulfanFit {
  KulfanParams params;
  double max_residual = 0.0;  // worst |y_fit - y| over both surfaces, chord units
  double rms_residual = 0.0;
};

inline constexpr int kDefaultKulfanDegree = 8;

KulfanFit to_kulfan(const AirfoilProfile& profile, int degree = kDefaultKulfanDegree);
AirfoilProfile from_kulfan(const KulfanParams& params, std::size_t n_per_surface = 200);

// Surface ordinates of a Kulfan section at arbitrary x in [0, 1].
double kulfan_upper_y(const KulfanParams& params, double x);
double kulfan_lower_y(const KulfanParams& params, double x);

// upper(x) - lower(x), linearly interpolated between stations.
double local_thickness(const AirfoilProfile& profile, double x);

struct ThicknessPeak {
  double x = 0.0;
  double thickness = 0.0;
};
ThicknessPeak max_thickness(const AirfoilProfile& profile);

// Profile export: header `x,y,surface`, shortest round-trip numbers.
std::string profile_to_csv(const AirfoilProfile& profile);
// Selig `.dat`: name line then one TE -> LE -> TE loop.
std::string profile_to_selig(const AirfoilProfile& profile, const std::string& name);

}  // namespace aerodesign
