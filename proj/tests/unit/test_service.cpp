#include <doctest.h>

#include <httplib.h>

#include "aerodesign/error.hpp"
#include "aerodesign/service.hpp"
#include "../support/helpers.hpp"
#include "../support/small_run.hpp"

using namespace aerodesign;
using testing_support::SmallRun;

namespace {

ApiResponse call(Service& svc, const std::string& method, const std::string& path,
                 const Json& body = nullptr, std::map<std::string, std::string> query = {}) {
  ApiRequest r;
  r.method = method;
  r.path = path;
  r.query = std::move(query);
  if (!body.is_null()) r.body = body.dump();
  return svc.handle(r);
}

Json body(const ApiResponse& r) { return Json::parse(r.body); }

}  // namespace

TEST_SUITE("service") {
  TEST_CASE("status codes by error class") {
    CHECK(http_status_for(errc::config_invalid) == 400);
    CHECK(http_status_for(errc::decision_invalid) == 400);
    CHECK(http_status_for(errc::run_not_found) == 404);
    CHECK(http_status_for(errc::not_paused) == 409);
    CHECK(http_status_for(errc::run_exists) == 409);
    CHECK(http_status_for(errc::backend) == 502);
    CHECK(http_status_for(errc::io) == 500);
  }

  TEST_CASE("a run driven through the API") {
    testing_support::TempDir dir;
    SmallRun fx(dir.path());
    Service svc(fx.deps(), SmallRun::config());

    CHECK(body(call(svc, "GET", "/api/version"))["api_version"] == kApiVersion);
    auto created = call(svc, "POST", "/api/runs", Json{{"run_id", "svc"}, {"request_id", "c1"}});
    CHECK(created.status == 202);
    CHECK(call(svc, "POST", "/api/runs", Json{{"run_id", "svc"}, {"request_id", "c1"}}).body == created.body);
    CHECK(call(svc, "POST", "/api/runs", Json{{"run_id", "svc"}}).status == 409);
    svc.wait_idle();

    const Json summary = body(call(svc, "GET", "/api/runs/svc"));
    CHECK(summary["paused"] == true);
    CHECK(summary["pause"]["kind"] == "awaiting_decision");
    CHECK(body(call(svc, "GET", "/api/runs"))["runs"].size() == 1);

    const Json cands = body(call(svc, "GET", "/api/runs/svc/candidates"));
    CHECK(cands["candidates"].size() == 6);
    CHECK(cands["review_set"].size() == 3);

    const auto head = body(call(svc, "GET", "/api/runs/svc/events"))["head"].get<int>();
    const Json tail = body(call(svc, "GET", "/api/runs/svc/events", nullptr, {{"since", std::to_string(head - 1)}}));
    CHECK(tail["events"].size() == 1);

    const int first = cands["review_set"][0].get<int>();
    const auto svg = call(svc, "GET", "/api/candidates/svc:" + std::to_string(first) + "/render.svg");
    CHECK(svg.status == 200);
    CHECK(svg.content_type == "image/svg+xml");
    CHECK(body(call(svc, "GET", "/api/candidates/svc:" + std::to_string(first) + "/aero"))["aero"].contains("cl"));
    CHECK(call(svc, "GET", "/api/candidates/svc:999/aero").status == 404);

    CHECK(call(svc, "GET", "/api/runs/svc/report").status == 409);
    CHECK(call(svc, "POST", "/api/runs/svc/decision", Json{{"kind", "proceed"}}).status == 202);
    svc.wait_idle();
    CHECK(body(call(svc, "GET", "/api/runs/svc"))["iteration"] == 1);
    CHECK(call(svc, "POST", "/api/runs/svc/decision", Json{{"kind", "accept"}}).status == 202);
    svc.wait_idle();
    CHECK(body(call(svc, "GET", "/api/runs/svc"))["stage"] == "done");
    const auto report = call(svc, "GET", "/api/runs/svc/report");
    CHECK(report.status == 200);
    CHECK(body(report)["accepted_design"]["design_id"] == 6);
    CHECK(call(svc, "POST", "/api/runs/svc/decision", Json{{"kind", "proceed"}}).status == 409);
  }

  TEST_CASE("request errors") {
    SmallRun fx;
    Service svc(fx.deps(), SmallRun::config());
    CHECK(call(svc, "GET", "/api/runs/nope").status == 404);
    CHECK(call(svc, "GET", "/api/nothing").status == 404);
    ApiRequest bad{"POST", "/api/runs", {}, "{not json", ""};
    const auto r = svc.handle(bad);
    CHECK(r.status == 400);
    CHECK(body(r).contains("code"));
    CHECK(call(svc, "POST", "/api/runs", Json{{"sample_n", 0}}).status == 400);
    CHECK(call(svc, "POST", "/api/runs", Json{{"run_id", "a"}, {"colour", 1}}).status == 400);
  }

  TEST_CASE("served over a socket") {
    testing_support::TempDir dir;
    SmallRun fx(dir.path());
    Service svc(fx.deps(), SmallRun::config());
    const int port = svc.start_background();
    httplib::Client client("127.0.0.1", port);
    auto res = client.Get("/api/version");
    REQUIRE(res);
    CHECK(res->status == 200);
    res = client.Post("/api/runs", Json{{"run_id", "net"}}.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 202);
    svc.wait_idle();
    res = client.Get("/api/runs/net");
    REQUIRE(res);
    CHECK(Json::parse(res->body)["pause"]["kind"] == "awaiting_decision");
    svc.stop();
  }

  TEST_CASE("stored runs are picked up on start") {
    testing_support::TempDir dir;
    {
      SmallRun fx(dir.path());
      Service svc(fx.deps(), SmallRun::config());
      call(svc, "POST", "/api/runs", Json{{"run_id", "kept"}});
      svc.wait_idle();
    }
    SmallRun fx(dir.path());
    Service svc(fx.deps(), SmallRun::config());
    CHECK(body(call(svc, "GET", "/api/runs/kept"))["pause"]["kind"] == "awaiting_decision");
  }
}
