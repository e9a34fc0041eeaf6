#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "aerodesign/geometry.hpp"

namespace aerodesign {

class FlowConditions {
 public:
  /// Throws Error(domain) unless 0 <= mach < 1, reynolds > 0 and
  /// -20 <= aoa_deg <= 20.
  FlowConditions(double mach, double reynolds, double aoa_deg);

  double mach() const noexcept { return mach_; }
  double reynolds() const noexcept { return reynolds_; }
  double aoa_deg() const noexcept { return aoa_deg_; }

  friend bool operator==(const FlowConditions&, const FlowConditions&) = default;

 private:
  double mach_;
  double reynolds_;
  double aoa_deg_;
};

struct AeroResult {
  double cl = 0.0;
  double cd = 0.0;
  double cm = 0.0;
  double l_over_d = 0.0;
  std::string solver_id;
  bool beyond_validity = false;

  /// Validates cd > 0 and finiteness; l_over_d is computed as cl / cd.
  static AeroResult make(double cl, double cd, double cm, std::string solver_id,
                         bool beyond_validity = false);

  friend bool operator==(const AeroResult&, const AeroResult&) = default;
};

struct InviscidResult {
  double cl = 0.0;
  double cm = 0.0;  // about the quarter chord, nose-up positive
};

struct CompressibleResult {
  double cl = 0.0;
  double cm = 0.0;
  double factor = 1.0;
  bool beyond_validity = false;
};

inline constexpr double kPrandtlGlauertValidMach = 0.7;
inline constexpr std::size_t kMinPanels = 40;

// Linear-strength vortex panel method with a Kutta condition at the trailing
// edge. Panels run lower TE -> LE -> upper TE over the profile's points.
InviscidResult panel_solve(const AirfoilProfile& profile, double aoa_deg);

// Schlichting turbulent flat-plate skin friction, 0.455 / (log10 Re)^2.58.
double skin_friction(double reynolds);
double form_factor(double thickness_ratio);
double viscous_drag(double thickness_ratio, double reynolds);
double viscous_drag(const AirfoilProfile& profile, double reynolds);

// Prandtl-Glauert scaling. Mach numbers above kPrandtlGlauertValidMach are
// flagged rather than rejected.
CompressibleResult compressibility_correction(double cl_inc, double cm_inc, double mach);

/// Analysis interface; the built-in solver is PanelAnalyzer and any surrogate
/// can stand in for it. Implementations must be pure and thread-safe.
class Analyzer {
 public:
  virtual ~Analyzer() = default;
  virtual AeroResult analyze(const AirfoilProfile& profile,
                             const FlowConditions& conditions) const = 0;
  virtual std::string id() const = 0;
};

class PanelAnalyzer final : public Analyzer {
 public:
  AeroResult analyze(const AirfoilProfile& profile,
                     const FlowConditions& conditions) const override;
  std::string id() const override;
};

AeroResult analyze(const AirfoilProfile& profile, const FlowConditions& conditions);

// Analyses profiles on up to `threads` workers; results keep input order.
std::vector<AeroResult> analyze_batch(std::span<const AirfoilProfile> profiles,
                                      const FlowConditions& conditions,
                                      const Analyzer& analyzer, unsigned threads = 1);

struct DesignAero {
  int design_id = 0;
  AeroResult result;
};
// Batch export: `design_id,cl,cd,cm,l_over_d,solver_id`.
std::string aero_results_to_csv(std::span<const DesignAero> rows);

}  // namespace aerodesign
