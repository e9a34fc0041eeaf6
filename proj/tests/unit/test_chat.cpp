#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <thread>

#include "aerodesign/chat.hpp"
#include "aerodesign/embedding.hpp"
#include "aerodesign/error.hpp"

using namespace aerodesign;
using nlohmann::json;

namespace {

// Minimal OpenAI-style server on a free local port.
class FakeApi {
 public:
  FakeApi() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++calls;
      last_body = json::parse(req.body);
      last_auth = req.get_header_value("Authorization");
      if (fail_first > 0) {
        --fail_first;
        res.status = 503;
        return;
      }
      res.set_content(json{{"choices", {{{"message", {{"content", "pong"}}}}}}}.dump(),
                      "application/json");
    });
    server_.Post("/v1/embeddings", [](const httplib::Request& req, httplib::Response& res) {
      const auto input = json::parse(req.body).at("input");
      json data = json::array();
      for (std::size_t i = input.size(); i-- > 0;) {
        data.push_back({{"index", i}, {"embedding", {double(i), 1.0}}});
      }
      res.set_content(json{{"data", data}}.dump(), "application/json");
    });
    server_.Post("/bad/chat/completions", [](const httplib::Request&, httplib::Response& res) {
      res.status = 401;
      res.set_content("denied", "text/plain");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeApi() {
    server_.stop();
    thread_.join();
  }
  std::string url(const std::string& prefix = "/v1") const {
    return "http://127.0.0.1:" + std::to_string(port_) + prefix;
  }

  std::atomic<int> calls{0};
  std::atomic<int> fail_first{0};
  json last_body;
  std::string last_auth;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

std::vector<ChatMessage> one_message(const std::string& text) {
  return {{Role::user, text, std::nullopt}};
}

}  // namespace

TEST_SUITE("chat") {
  TEST_CASE("scripted rules match in order with scopes") {
    const auto b = ScriptedChatBackend::from_yaml(R"(
id: s
rules:
  - contains: [alpha, beta]
    response: both
  - regex: "number: [0-9]+\\b"
    scope: last_user
    response: numbered
  - contains: persona
    scope: system
    response: sys
  - contains: boom
    fail: true
default: fallback
)");
    CHECK(b.id() == "s");
    CHECK(b.complete(one_message("ALPHA and beta")) == "both");
    CHECK(b.complete(one_message("number: 12")) == "numbered");
    CHECK(b.complete(one_message("alpha only")) == "fallback");
    const std::vector<ChatMessage> sys{{Role::system, "a persona", std::nullopt},
                                       {Role::user, "hi", std::nullopt}};
    CHECK(b.complete(sys) == "sys");
    CHECK_THROWS_AS(b.complete(one_message("boom")), Error);
  }

  TEST_CASE("scripted backend without a default fails on no match") {
    const auto b = ScriptedChatBackend::from_yaml("rules: []\n");
    try {
      b.complete(one_message("x"));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == errc::backend);
    }
    CHECK_THROWS_AS(ScriptedChatBackend::from_yaml("rules:\n  - contains: x\n"), Error);
    CHECK_THROWS_AS(ScriptedChatBackend::from_yaml("[1, 2]"), Error);
    CHECK_FALSE(ScriptedChatBackend::from_yaml("capabilities: [text]\n").capabilities().vision);
  }

  TEST_CASE("base URL parsing") {
    const auto u = parse_base_url("https://api.example.com/v1/");
    CHECK(u.scheme_host_port == "https://api.example.com");
    CHECK(u.path_prefix == "/v1");
    CHECK(parse_base_url("http://h:1").path_prefix.empty());
    CHECK_THROWS_AS(parse_base_url("nohost"), Error);
  }

  TEST_CASE("HTTP chat backend speaks chat-completions") {
    FakeApi api;
    HttpBackendConfig cfg{api.url(), "m1", "secret", std::chrono::seconds(5), 2, true};
    const HttpChatBackend b(cfg);
    std::vector<ChatMessage> msgs{{Role::system, "sys", std::nullopt},
                                  {Role::user, "ping", ImageAttachment{"image/png", {1, 2, 3}}}};
    CHECK(b.complete(msgs) == "pong");
    CHECK(api.last_auth == "Bearer secret");
    CHECK(api.last_body["model"] == "m1");
    CHECK(api.last_body["messages"][0]["content"] == "sys");
    CHECK(api.last_body["messages"][1]["content"][1]["image_url"]["url"] == "data:image/png;base64,AQID");
    CHECK(b.capabilities().vision);
  }

  TEST_CASE("HTTP backend retries server errors and not client errors") {
    FakeApi api;
    api.fail_first = 2;
    const HttpChatBackend b({api.url(), "m", "", std::chrono::seconds(5), 2, false});
    CHECK(b.complete(one_message("x")) == "pong");
    CHECK(api.calls == 3);
    api.fail_first = 5;
    api.calls = 0;
    CHECK_THROWS_AS(b.complete(one_message("x")), Error);
    CHECK(api.calls == 3);
    const HttpChatBackend bad({api.url("/bad"), "m", "", std::chrono::seconds(5), 2, false});
    CHECK_THROWS_AS(bad.complete(one_message("x")), Error);
    CHECK_THROWS_AS(HttpChatBackend({api.url(), "", "", std::chrono::seconds(1), 0, false}), Error);
  }

  TEST_CASE("HTTP embedder orders vectors by index") {
    FakeApi api;
    const HttpEmbedder e({api.url(), "emb", "", std::chrono::seconds(5), 0, false});
    const std::vector<std::string> texts{"a", "b", "c"};
    const auto v = e.embed(texts);
    REQUIRE(v.size() == 3);
    CHECK(v[2] == Embedding{2.0f, 1.0f});
    CHECK(e.embed({}).empty());
  }
}
