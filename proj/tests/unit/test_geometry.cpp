#include <doctest.h>

#include <random>

#include "aerodesign/error.hpp"
#include "aerodesign/geometry.hpp"
#include "../support/oracles.hpp"

using namespace aerodesign;

TEST_SUITE("geometry") {
  TEST_CASE("thickness matches the polynomial oracle") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> ux(0.0, 1.0), ut(0.01, 0.4);
    for (int i = 0; i < 1000; ++i) {
      const double x = ux(rng), t = ut(rng);
      const double expected = oracle::half_thickness(x, t);
      CHECK(std::abs(thickness_at(x, t) - expected) <= 1e-14 * std::abs(expected) + 1e-300);
    }
    CHECK(thickness_at(0.0, 0.12) == 0.0);
    CHECK(thickness_at(1.0, 0.12) == doctest::Approx(0.0105 * 0.12).epsilon(1e-12));
    CHECK(std::abs(thickness_at(1.0, 0.12, TrailingEdge::closed)) < 1e-4 * 0.12);
  }

  TEST_CASE("thickness rejects x outside the chord") {
    CHECK_THROWS_AS(thickness_at(-0.1, 0.12), Error);
    CHECK_THROWS_AS(thickness_at(1.1, 0.12), Error);
  }

  TEST_CASE("camber line is continuous at the camber location") {
    const auto before = camber_at(0.4 - 1e-12, 0.05, 0.4);
    const auto after = camber_at(0.4 + 1e-12, 0.05, 0.4);
    CHECK(before.y == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(after.y == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(std::abs(before.slope) < 1e-9);
    CHECK(camber_at(0.0, 0.05, 0.4).y == 0.0);
    CHECK(std::abs(camber_at(1.0, 0.05, 0.4).y) < 1e-15);
  }

  TEST_CASE("cosine stations") {
    const auto x = cosine_stations(200);
    REQUIRE(x.size() == 200);
    CHECK(x.front() == 0.0);
    CHECK(x.back() == 1.0);
    for (std::size_t i = 1; i < x.size(); ++i) CHECK(x[i] > x[i - 1]);
    CHECK_THROWS_AS(cosine_stations(1), Error);
  }

  TEST_CASE("symmetric section is mirror symmetric") {
    const auto p = generate_naca4(DesignParams(0.0, 0.4, 0.12), 200);
    for (std::size_t i = 0; i < p.n_per_surface(); ++i) {
      CHECK(p.upper()[i].x == p.lower()[i].x);
      CHECK(std::abs(p.upper()[i].y + p.lower()[i].y) <= 1e-12);
    }
  }

  TEST_CASE("maximum thickness sits near 30% chord") {
    const auto p = generate_naca4(DesignParams(0.0, 0.4, 0.15), 400);
    const auto peak = max_thickness(p);
    CHECK(peak.thickness == doctest::Approx(0.15).epsilon(0.01));
    CHECK(std::abs(peak.x - 0.30) <= 0.01);
    CHECK(std::abs(peak.x - 0.30) <= 0.01);
  }

  TEST_CASE("profiles share stations and start at the leading edge") {
    const auto p = generate_naca4(DesignParams(0.05, 0.4, 0.14), 120);
    CHECK(p.upper().front() == p.lower().front());
    CHECK(p.upper().front().x == 0.0);
    CHECK(p.upper().back().x == 1.0);
    CHECK(std::holds_alternative<DesignParams>(p.provenance()));
  }

  TEST_CASE("invalid profiles are rejected") {
    std::vector<Point2> up{{0, 0}, {0.5, 0.05}, {1, 0}};
    std::vector<Point2> lo{{0, 0}, {0.5, 0.06}, {1, 0}};
    CHECK_THROWS_AS(AirfoilProfile(up, lo, DesignParams(0, 0.4, 0.1)), Error);
    std::vector<Point2> lo2{{0, 0}, {0.6, -0.05}, {1, 0}};
    CHECK_THROWS_AS(AirfoilProfile(up, lo2, DesignParams(0, 0.4, 0.1)), Error);
    CHECK_THROWS_AS(generate_naca4(DesignParams(0.05, 0.4, -0.1)), Error);
    CHECK_THROWS_AS(generate_naca4(DesignParams(0.05, 0.4, 0.12), 2), Error);
  }

  TEST_CASE("Kulfan fit of a mid-range section") {
    const auto p = generate_naca4(DesignParams(0.05, 0.4, 0.14), 200);
    const auto fit = to_kulfan(p, 8);
    CHECK(fit.params.degree() == 8);
    CHECK(fit.max_residual < 1e-3);
    CHECK(fit.rms_residual <= fit.max_residual);
    CHECK(fit.params.te_thickness() == doctest::Approx(2 * 0.0105 * 0.14).epsilon(1e-6));
    const auto back = from_kulfan(fit.params, 200);
    double worst = 0.0;
    for (std::size_t i = 0; i < back.n_per_surface(); ++i) {
      worst = std::max(worst, std::abs(back.upper()[i].y - p.upper()[i].y));
      worst = std::max(worst, std::abs(back.lower()[i].y - p.lower()[i].y));
    }
    CHECK(worst == doctest::Approx(fit.max_residual).epsilon(1e-6));
  }

  TEST_CASE("Kulfan ordinates at the ends") {
    const KulfanParams k({0.2, 0.2, 0.2}, {-0.1, -0.1, -0.1}, 0.002);
    CHECK(kulfan_upper_y(k, 0.0) == 0.0);
    CHECK(kulfan_upper_y(k, 1.0) == doctest::Approx(0.001));
    CHECK(kulfan_lower_y(k, 1.0) == doctest::Approx(-0.001));
    CHECK_THROWS_AS(KulfanParams({0.1}, {0.1, 0.2}, 0.0), Error);
  }

  TEST_CASE("local thickness interpolates") {
    const auto p = generate_naca4(DesignParams(0.0, 0.4, 0.12), 300);
    CHECK(local_thickness(p, 0.3) == doctest::Approx(2 * thickness_at(0.3, 0.12)).epsilon(1e-4));
  }

  TEST_CASE("CSV and Selig export") {
    const auto p = generate_naca4(DesignParams(0.02, 0.4, 0.12), 30);
    const auto csv = profile_to_csv(p);
    CHECK(csv.rfind("x,y,surface\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 61);
    const auto dat = profile_to_selig(p, "NACA 2412");
    CHECK(dat.rfind("NACA 2412\n", 0) == 0);
    CHECK(std::count(dat.begin(), dat.end(), '\n') == 1 + 59);
  }
}
