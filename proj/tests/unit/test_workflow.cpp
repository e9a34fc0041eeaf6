#include <doctest.h>

#include <random>

#include "aerodesign/error.hpp"
#include "aerodesign/run_store.hpp"
#include "aerodesign/util.hpp"
#include "aerodesign/workflow.hpp"
#include "../support/helpers.hpp"
#include "../support/small_run.hpp"

using namespace aerodesign;
using testing_support::SmallRun;
using testing_support::TempDir;

namespace {

ManagerDecision decision(DecisionKind kind, std::string comment = "", std::string request_id = "") {
  ManagerDecision d;
  d.kind = kind;
  d.comment = std::move(comment);
  d.request_id = std::move(request_id);
  return d;
}

std::string error_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST_SUITE("workflow") {
  TEST_CASE("run pauses after the first review round with the best designs first") {
    SmallRun fx;
    Workflow wf(fx.deps());
    RunState s = wf.kickoff(SmallRun::config());
    wf.advance(s);
    CHECK(s.stage == Stage::review);
    REQUIRE(s.pause);
    CHECK(s.pause->kind == pause_kind::awaiting_decision);
    CHECK(s.pause->reason == "review round 1: 0 valid, 3 invalid");
    REQUIRE(s.review_set.size() == 3);
    for (std::size_t i = 1; i < s.review_set.size(); ++i) {
      CHECK(s.candidates.at(s.review_set[i - 1]).aero.l_over_d >=
            s.candidates.at(s.review_set[i]).aero.l_over_d);
    }
    for (const int id : s.review_set) CHECK(s.candidates.at(id).viable);
    CHECK(s.requirements->functional.size() == 1);
    CHECK(s.events.front().type == "run_created");
    CHECK(s.events.back().type == "paused");
  }

  TEST_CASE("the full chain reaches optimisation and a report") {
    SmallRun fx;
    Workflow wf(fx.deps());
    RunState s = wf.kickoff(SmallRun::config());
    wf.advance(s);
    wf.decide(s, decision(DecisionKind::proceed));
    REQUIRE(s.pause);
    CHECK(s.iteration == 1);
    CHECK(s.review_set == std::vector<int>{6});
    CHECK(s.candidates.at(6).origin == "revision");
    CHECK(s.candidates.at(6).params == DesignParams(0.05, 0.4, 0.14));
    CHECK(s.verdict_in_round(6, s.round)->verdict == Verdict::valid);
    wf.decide(s, decision(DecisionKind::accept));
    CHECK(s.finished());
    CHECK(s.accepted_design == 6);
    REQUIRE(s.optimization);
    CHECK((*s.optimization)["audit"]["all_ok"] == true);
    const Json report = Json::parse(build_report(s));
    CHECK(report["accepted_design"]["design_id"] == 6);
    CHECK(report["stage"] == "done");
    CHECK(candidates_to_csv(s).rfind("design_id,origin,parent,iteration,", 0) == 0);
  }

  TEST_CASE("reject forces an invalid verdict carrying the comment") {
    SmallRun fx;
    Workflow wf(fx.deps());
    RunState s = wf.kickoff(SmallRun::config());
    wf.advance(s);
    wf.decide(s, decision(DecisionKind::proceed));
    ManagerDecision d = decision(DecisionKind::reject_with_comment, "Needs more lift.");
    d.design_id = 6;
    wf.decide(s, d, false);
    const auto* v = s.verdict_in_round(6, s.round);
    REQUIRE(v);
    CHECK(v->verdict == Verdict::invalid);
    CHECK(v->reviewer == Reviewer::manager);
    CHECK(v->feedback.find("Needs more lift.") != std::string::npos);
    CHECK(s.stage == Stage::revision);
    wf.advance(s);
    CHECK(s.iteration == 2);
    CHECK(s.candidates.at(7).parent == 6);
  }

  TEST_CASE("decisions are validated and idempotent") {
    SmallRun fx;
    Workflow wf(fx.deps());
    RunState s = wf.kickoff(SmallRun::config());
    CHECK(error_code([&] { wf.decide(s, decision(DecisionKind::proceed)); }) == errc::not_paused);
    wf.advance(s);
    CHECK(error_code([&] { wf.decide(s, decision(DecisionKind::reject_with_comment)); }) ==
          errc::decision_invalid);
    ManagerDecision stranger = decision(DecisionKind::comment_only, "hi");
    stranger.design_id = 99;
    CHECK(error_code([&] { wf.decide(s, stranger); }) == errc::decision_invalid);

    const auto before = s.events.size();
    wf.decide(s, decision(DecisionKind::proceed, "", "req-1"));
    const auto after = s.events.size();
    CHECK(after > before);
    wf.decide(s, decision(DecisionKind::proceed, "", "req-1"));
    CHECK(s.events.size() == after);
  }

  TEST_CASE("pause kinds") {
    SUBCASE("no viable designs") {
      SmallRun fx;
      Workflow wf(fx.deps());
      auto cfg = SmallRun::config();
      cfg.cl_floor = 50.0;
      RunState s = wf.kickoff(cfg);
      wf.advance(s);
      REQUIRE(s.pause);
      CHECK(s.pause->kind == pause_kind::no_viable_designs);
      CHECK(s.stage == Stage::design);
    }
    SUBCASE("iteration budget") {
      SmallRun fx;
      Workflow wf(fx.deps());
      auto cfg = SmallRun::config();
      cfg.max_iterations = 0;
      RunState s = wf.kickoff(cfg);
      wf.advance(s);
      wf.decide(s, decision(DecisionKind::proceed));
      REQUIRE(s.pause);
      CHECK(s.pause->kind == pause_kind::iteration_budget_exhausted);
      wf.decide(s, decision(DecisionKind::proceed));
      CHECK(s.finished());
      CHECK_FALSE(s.accepted_design);
    }
    SUBCASE("backend failure") {
      SmallRun fx;
      fx.se = ScriptedChatBackend::from_yaml(std::string(testing_support::kSmallSystemsEngineer) +
                                              "  - contains: x\n    fail: true\n");
      fx.se = ScriptedChatBackend("broken", {{{"Design review"}, {}, ScriptedChatBackend::Scope::all, "", true}},
                                  std::string("```requirements\nfunctional:\n- a\nnon_functional:\n- b\n```"));
      Workflow wf(fx.deps());
      RunState s = wf.kickoff(SmallRun::config());
      wf.advance(s);
      REQUIRE(s.pause);
      CHECK(s.pause->kind == pause_kind::backend_failure);
    }
    SUBCASE("revision outside the design space") {
      SmallRun fx;
      fx.de = ScriptedChatBackend(
          "de", {}, std::string("```revision\nmax_camber: 0.5\ncamber_location: 0.4\nmax_thickness: 0.1\n```"));
      Workflow wf(fx.deps());
      RunState s = wf.kickoff(SmallRun::config());
      wf.advance(s);
      wf.decide(s, decision(DecisionKind::proceed));
      REQUIRE(s.pause);
      CHECK(s.pause->kind == pause_kind::revision_failed);
    }
  }

  TEST_CASE("event log replays to the live state and detects tampering") {
    TempDir dir;
    SmallRun fx(dir.path());
    Workflow wf(fx.deps());
    RunState s = wf.kickoff(SmallRun::config("logged"));
    wf.advance(s);
    wf.decide(s, decision(DecisionKind::proceed));

    CHECK(replay(s.events) == s);
    const std::string log = fx.store->read_events("logged");
    CHECK(parse_event_log(log) == s.events);
    CHECK(wf.resume("logged") == s);
    for (std::size_t i = 0; i < s.events.size(); ++i) CHECK(s.events[i].seq == i + 1);

    std::string tampered = log;
    const auto pos = tampered.find("\"max_camber\":");
    REQUIRE(pos != std::string::npos);
    auto digit = tampered.find_first_of("123456789", pos + 15);
    tampered[digit] = tampered[digit] == '1' ? '2' : '1';
    CHECK(error_code([&] { parse_event_log(tampered); }) == errc::checksum);
    CHECK(error_code([&] { parse_event_log("not json\n"); }) == errc::log_corrupt);

    const auto first_nl = log.find('\n');
    CHECK_THROWS_AS(parse_event_log(log.substr(first_nl + 1)), Error);
  }

  TEST_CASE("same configuration gives the same report") {
    auto run = [](const std::filesystem::path& root) {
      SmallRun fx(root);
      Workflow wf(fx.deps());
      RunState s = wf.kickoff(SmallRun::config());
      wf.advance(s);
      wf.decide(s, decision(DecisionKind::proceed));
      wf.decide(s, decision(DecisionKind::accept));
      return fx.store->read_artifact("small", "report.json");
    };
    TempDir a, b;
    CHECK(run(a.path()) == run(b.path()));
  }

  TEST_CASE("stage graph") {
    CHECK(stage_transition_allowed(Stage::kickoff, Stage::requirements));
    CHECK(stage_transition_allowed(Stage::review, Stage::revision));
    CHECK(stage_transition_allowed(Stage::revision, Stage::review));
    CHECK(stage_transition_allowed(Stage::optimization, Stage::done));
    CHECK_FALSE(stage_transition_allowed(Stage::kickoff, Stage::review));
    CHECK_FALSE(stage_transition_allowed(Stage::done, Stage::review));
    CHECK_FALSE(stage_transition_allowed(Stage::design, Stage::optimization));
    for (const auto st : {Stage::kickoff, Stage::requirements, Stage::design, Stage::review,
                          Stage::revision, Stage::optimization, Stage::done}) {
      CHECK(stage_from_string(to_string(st)) == st);
    }
  }

  TEST_CASE("run configuration validation and JSON") {
    auto cfg = SmallRun::config();
    CHECK_NOTHROW(cfg.validate());
    CHECK(run_config_from_json(to_json(cfg)) == cfg);
    auto bad = cfg;
    bad.review_top_k = 10;
    CHECK(error_code([&] { bad.validate(); }) == errc::config_invalid);
    bad = cfg;
    bad.n_points = 10;
    CHECK(error_code([&] { bad.validate(); }) == errc::config_invalid);
    bad = cfg;
    bad.run_id = "../evil";
    CHECK(error_code([&] { bad.validate(); }) == errc::config_invalid);
    CHECK(error_code([] { run_config_from_json(Json{{"bogus", 1}}); }) == errc::config_invalid);
    CHECK(error_code([] { run_config_from_json(Json{{"sample_n", -3}}); }) == errc::config_invalid);
    CHECK(run_config_from_json(Json{{"sample_n", 12}}).sample_n == 12);
  }

  TEST_CASE("decision JSON") {
    ManagerDecision d = decision(DecisionKind::reject_with_comment, "more lift", "r1");
    d.design_id = 4;
    CHECK(decision_from_json(to_json(d)) == d);
    CHECK_THROWS_AS(decision_from_json(Json{{"kind", "accept"}, {"extra", 1}}), Error);
    CHECK_THROWS_AS(decision_from_json(Json{{"kind", "maybe"}}), Error);
  }

  TEST_CASE("run store") {
    TempDir dir;
    RunStore store(dir.path());
    CHECK(valid_run_id("run-1_a"));
    CHECK_FALSE(valid_run_id("../x"));
    CHECK_FALSE(valid_run_id(""));
    store.create("r1");
    CHECK(error_code([&] { store.create("r1"); }) == errc::run_exists);
    CHECK(error_code([&] { store.read_events("nope"); }) == errc::run_not_found);
    store.write_artifact("r1", "a/b.txt", "x");
    CHECK(store.read_artifact("r1", "a/b.txt") == "x");
    CHECK(store.has_artifact("r1", "a/b.txt"));
    CHECK_THROWS_AS(store.write_artifact("r1", "../escape.txt", "x"), Error);
    CHECK(store.list_runs() == std::vector<std::string>{"r1"});
  }

  TEST_CASE("automatic run ids are derived from the configuration") {
    TempDir dir;
    SmallRun fx(dir.path());
    Workflow wf(fx.deps());
    auto cfg = SmallRun::config("");
    const RunState a = wf.kickoff(cfg);
    const RunState b = wf.kickoff(cfg);
    CHECK(a.run_id.rfind("run-", 0) == 0);
    CHECK(b.run_id == a.run_id + "-2");
  }
}
