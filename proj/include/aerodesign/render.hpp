#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aerodesign/aero.hpp"
#include "aerodesign/geometry.hpp"

namespace aerodesign {

struct RenderSpec {
  int width = 800;
  int height = 300;
  std::optional<std::string> title;
  bool show_params = true;    // provenance parameters as a caption
  std::optional<AeroResult> metrics;  // Cl/Cd/Cm/L/D overlay when present
  std::string stroke = "#1f4e79";
  std::string fill = "#dce6f2";
  std::string comparison_stroke = "#c0504d";
};

// SVG 1.1 document; viewBox in chord units x 1000 with y pointing up on
// screen. Output bytes depend only on the inputs.
std::string render_profile(const AirfoilProfile& profile, const RenderSpec& spec = {});

std::string render_comparison(const AirfoilProfile& a, const AirfoilProfile& b,
                              const RenderSpec& spec = {}, const std::string& label_a = "initial",
                              const std::string& label_b = "optimized");

// Grayscale PNG of the filled section for vision backends.
std::vector<std::uint8_t> rasterize_profile_png(const AirfoilProfile& profile, int width = 512,
                                                int height = 192);

}  // namespace aerodesign
