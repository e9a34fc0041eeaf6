#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aerodesign/geometry.hpp"

namespace aerodesign {

/// Axis-aligned box over (max_camber, camber_location, max_thickness).
class DesignSpace {
 public:
  /// Defaults to [0.01, 0.095] x [0.05, 0.9] x [0.01, 0.40].
  DesignSpace();
  DesignSpace(std::array<double, 3> lower, std::array<double, 3> upper);

  static DesignSpace unit_cube();

  const std::array<double, 3>& lower() const noexcept { return lower_; }
  const std::array<double, 3>& upper() const noexcept { return upper_; }

  bool contains(const DesignParams& p) const noexcept;
  // Distance outside the box along the worst axis, as a fraction of that
  // axis' width. Zero when inside.
  double relative_violation(const DesignParams& p) const noexcept;
  DesignParams clamp(const DesignParams& p) const;

  friend bool operator==(const DesignSpace&, const DesignSpace&) = default;

 private:
  std::array<double, 3> lower_;
  std::array<double, 3> upper_;
};

enum class SampleKind { latin_hypercube, sobol, halton, uniform_random };

std::string to_string(SampleKind kind);
SampleKind sample_kind_from_string(const std::string& name);

/// Sampling strategy. Latin hypercube and uniform random need a seed; Sobol
/// and Halton are deterministic and take a skip count instead.
///
/// Index convention for the quasi-random sequences: index 0 (the origin) is
/// never emitted. With skip = 0 the first point is sequence index 1, i.e.
/// (0.5, 0.5, 0.5) for Sobol and (1/2, 1/3, 1/5) for Halton.
struct SampleStrategy {
  SampleKind kind = SampleKind::latin_hypercube;
  std::optional<std::uint64_t> seed;
  std::uint64_t skip = 0;

  static SampleStrategy latin_hypercube(std::uint64_t seed) {
    return {SampleKind::latin_hypercube, seed, 0};
  }
  static SampleStrategy uniform_random(std::uint64_t seed) {
    return {SampleKind::uniform_random, seed, 0};
  }
  static SampleStrategy sobol(std::uint64_t skip = 0) { return {SampleKind::sobol, {}, skip}; }
  static SampleStrategy halton(std::uint64_t skip = 0) { return {SampleKind::halton, {}, skip}; }

  friend bool operator==(const SampleStrategy&, const SampleStrategy&) = default;
};

using UnitPoint = std::array<double, 3>;

// Points in [0, 1)^3 before mapping onto a design space.
std::vector<UnitPoint> sample_unit(const SampleStrategy& strategy, std::size_t n);

std::vector<DesignParams> sample(const DesignSpace& space, const SampleStrategy& strategy,
                                 std::size_t n);

// Samples export: `id,max_camber,camber_location,max_thickness`.
std::string samples_to_csv(std::span<const DesignParams> samples);

// L2-star discrepancy of points in the unit cube (Warnock's closed form).
double l2_star_discrepancy(std::span<const UnitPoint> points);

}  // namespace aerodesign
