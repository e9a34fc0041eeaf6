#include <doctest.h>

#include <cstdlib>

#include "aerodesign/geometry.hpp"
#include "aerodesign/render.hpp"
#include "aerodesign/util.hpp"
#include "../support/helpers.hpp"

using namespace aerodesign;

namespace {

// Compares against tests/golden/<name>; AERODESIGN_UPDATE_GOLDEN=1 rewrites it.
void check_golden(const std::string& name, const std::string& actual) {
  const auto path = testing_support::golden_dir() / name;
  if (std::getenv("AERODESIGN_UPDATE_GOLDEN") != nullptr) write_file(path, actual);
  CHECK(read_file(path) == actual);
}

}  // namespace

TEST_SUITE("render") {
  TEST_CASE("profile SVG matches the golden file") {
    const auto p = generate_naca4(DesignParams(0.02, 0.4, 0.12), 60);
    RenderSpec spec;
    spec.title = "NACA 2412";
    spec.metrics = AeroResult::make(0.5, 0.01, -0.05, "test");
    check_golden("naca2412.svg", render_profile(p, spec));
  }

  TEST_CASE("SVG is deterministic and escapes text") {
    const auto p = generate_naca4(DesignParams(0.0, 0.4, 0.12), 40);
    RenderSpec spec;
    spec.title = "a<b & \"c\"";
    const auto svg = render_profile(p, spec);
    CHECK(svg == render_profile(p, spec));
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("a&lt;b &amp;") != std::string::npos);
    const auto cmp = render_comparison(p, generate_naca4(DesignParams(0.04, 0.4, 0.10), 40), spec);
    CHECK(cmp.find("initial") != std::string::npos);
    CHECK(cmp.find("optimized") != std::string::npos);
  }

  TEST_CASE("PNG raster has a valid signature and chunks") {
    const auto png = rasterize_profile_png(generate_naca4(DesignParams(0.02, 0.4, 0.12), 60), 64, 32);
    REQUIRE(png.size() > 40);
    CHECK(png[0] == 0x89);
    CHECK(std::string(png.begin() + 12, png.begin() + 16) == "IHDR");
    CHECK(std::string(png.end() - 8, png.end() - 4) == "IEND");
  }
}
