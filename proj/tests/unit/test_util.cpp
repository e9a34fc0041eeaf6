#include <doctest.h>

#include <cmath>
#include <limits>

#include "aerodesign/csv.hpp"
#include "aerodesign/error.hpp"
#include "aerodesign/resources.hpp"
#include "aerodesign/util.hpp"
#include "../support/helpers.hpp"

using namespace aerodesign;

TEST_SUITE("util") {
  TEST_CASE("doubles format as the shortest round-trip text") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.5e-7) == "-2.5e-07");
    for (const double v : {0.1 + 0.2, 1.0 / 3.0, 5e6, 1e-300, -0.0}) {
      CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_fixed(1.23456, 3) == "1.235");
  }

  TEST_CASE("base64 round trip") {
    const std::vector<std::uint8_t> bytes{0, 1, 2, 250, 251, 252, 253};
    for (std::size_t n = 0; n <= bytes.size(); ++n) {
      const std::vector<std::uint8_t> part(bytes.begin(), bytes.begin() + static_cast<long>(n));
      CHECK(base64_decode(base64_encode(part)) == part);
    }
    const std::string man = "Man";
    CHECK(base64_encode(std::span(reinterpret_cast<const std::uint8_t*>(man.data()), man.size())) ==
          "TWFu");
  }

  TEST_CASE("fnv1a64 and hex") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(hex64(0xabcULL) == "0000000000000abc");
  }

  TEST_CASE("string helpers") {
    CHECK(trim("  a b \n") == "a b");
    CHECK(to_lower("AbC") == "abc");
    CHECK(normalize_concept("  Lift \t Coefficient ") == "lift coefficient");
  }

  TEST_CASE("file helpers") {
    testing_support::TempDir dir;
    const auto p = dir.path() / "a" / "b.txt";
    write_file_atomic(p, "hello");
    CHECK(read_file(p) == "hello");
    write_file(p, "x");
    CHECK(read_file(p) == "x");
    CHECK_THROWS_AS(read_file(dir.path() / "missing"), Error);
  }

  TEST_CASE("CSV parse and format") {
    const auto recs = csv::parse("a,\"b,c\",\"d\"\"e\"\r\n1,2,3\n\"multi\nline\",x,y\n");
    REQUIRE(recs.size() == 3);
    CHECK(recs[0].fields == csv::Row{"a", "b,c", "d\"e"});
    CHECK(recs[2].fields[0] == "multi\nline");
    CHECK(recs[2].line == 3);
    CHECK(csv::format_row({"a", "b,c", "d\"e"}) == "a,\"b,c\",\"d\"\"e\"");
    CHECK_THROWS_AS(csv::parse("\"open"), Error);
    for (const auto& row : {csv::Row{"", "x"}, csv::Row{" lead", "tr\"ail"}}) {
      CHECK(csv::parse(csv::format_row(row) + "\n")[0].fields == row);
    }
  }

  TEST_CASE("bundled prompt resources") {
    for (const auto& name : resource_names()) CHECK_FALSE(resource_text(name).empty());
    CHECK(resource("systems_engineer_kg").verbatim);
    CHECK(resource_text("manager_kickoff").find("NACA") != std::string::npos);
    CHECK_THROWS_AS(resource_text("nope"), Error);
  }
}
