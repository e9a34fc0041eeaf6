#include <doctest.h>

#include <sstream>

#include "aerodesign/cli.hpp"
#include "aerodesign/knowledge.hpp"
#include "aerodesign/util.hpp"
#include "aerodesign/workflow.hpp"
#include "../support/helpers.hpp"
#include "../support/small_config.hpp"

using namespace aerodesign;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "aerodesign");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit with 1") {
    CHECK(cli({}).code == 1);
    CHECK(cli({"frobnicate"}).code == 1);
    CHECK(cli({"run"}).code == 1);
    CHECK(cli({"decide", "--config", "c", "--run", "r"}).code == 1);
    CHECK(cli({"decide", "--config", "c", "--run", "r", "--accept", "--proceed"}).code == 1);
    CHECK(cli({"--help"}).code == 0);
  }

  TEST_CASE("runtime errors exit with 2") {
    const auto r = cli({"status", "--config", "/nonexistent.yaml", "--run", "x"});
    CHECK(r.code == 2);
    CHECK(r.err.find("config.invalid") != std::string::npos);
  }

  TEST_CASE("run, status, decide and export") {
    testing_support::TempDir dir;
    const auto config = testing_support::write_small_config(dir.path()).string();
    auto r = cli({"run", "--config", config});
    REQUIRE(r.code == 0);
    const Json started = Json::parse(r.out);
    CHECK(started["run_id"] == "small");
    CHECK(started["pause"]["kind"] == "awaiting_decision");
    CHECK(Json::parse(cli({"status", "--config", config, "--run", "small"}).out)["stage"] == "review");
    CHECK(cli({"status", "--config", config, "--run", "missing"}).code == 2);
    r = cli({"decide", "--config", config, "--run", "small", "--proceed"});
    CHECK(r.code == 0);
    CHECK(Json::parse(r.out)["iteration"] == 1);
    r = cli({"export", "--config", config, "--run", "small", "--out", (dir.path() / "x").string()});
    CHECK(r.code == 0);
    CHECK(std::filesystem::exists(dir.path() / "x" / "events.jsonl"));
    CHECK(std::filesystem::exists(dir.path() / "x" / "candidates.csv"));
  }

  TEST_CASE("build-kg writes a filtered CSV") {
    testing_support::TempDir dir;
    const auto out = (dir.path() / "kg.csv").string();
    const auto r = cli({"build-kg", "--corpus", (testing_support::data_dir() / "corpus").string(), "--prompt",
                        "systems_engineer_kg", "--out", out, "--script",
                        (testing_support::data_dir() / "scripts" / "ontologist.yaml").string(),
                        "--min-degree", "2", "--index", (dir.path() / "kg.jsonl").string()});
    REQUIRE(r.code == 0);
    const Json summary = Json::parse(r.out);
    CHECK(summary["documents"] == 3);
    const auto kg = import_csv(read_file(out));
    for (const auto& [node, degree] : kg.degrees()) CHECK(degree >= 1);
    CHECK(std::filesystem::exists(dir.path() / "kg.jsonl"));
    CHECK(cli({"build-kg", "--corpus", "x", "--prompt", "poet", "--out", out}).code == 1);
  }

  TEST_CASE("optimize subcommand") {
    testing_support::TempDir dir;
    const auto r = cli({"optimize", "--budget", "50", "--out", dir.path().string()});
    REQUIRE(r.code == 0);
    const Json j = Json::parse(r.out);
    CHECK(j["evaluations"].get<int>() <= 50);
    CHECK(j["constraints_ok"] == true);
    CHECK(std::filesystem::exists(dir.path() / "optimization_trajectory.csv"));
    CHECK(cli({"optimize", "--budget", "5"}).code == 1);
  }
}
