#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aerodesign {

enum class Role { system, user, assistant };
std::string to_string(Role role);

struct ImageAttachment {
  std::string mime;  // "image/png"
  std::vector<std::uint8_t> data;
};

struct ChatMessage {
  Role role = Role::user;
  std::string content;
  std::optional<ImageAttachment> image;
};

struct Capabilities {
  bool text = true;
  bool vision = false;
};

/// Single-turn chat completion. Implementations throw Error(backend.transport)
/// when the backend cannot produce a response.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(std::span<const ChatMessage> messages) const = 0;
  virtual Capabilities capabilities() const = 0;
  virtual std::string id() const = 0;
};

/// Deterministic backend driven by an ordered rule list. The first rule whose
/// matchers all hit the conversation text wins; the response is therefore a
/// pure function of (messages, script).
///
/// Script format (YAML or JSON):
///
///     id: scripted-systems-engineer
///     capabilities: [text, vision]
///     rules:
///       - contains: ["Design ID-4", "review"]   # all substrings, case-insensitive
///         scope: last_user                       # all | last_user | system
///         response: |
///           ...
///       - regex: "camber[: ]+0\\.03"
///         response: ...
///       - contains: "offline"
///         fail: true                             # simulated transport error
///     default: optional fallback response
class ScriptedChatBackend final : public ChatBackend {
 public:
  enum class Scope { all, last_user, system };

  struct Rule {
    std::vector<std::string> contains;
    std::optional<std::string> regex;
    Scope scope = Scope::all;
    std::string response;
    bool fail = false;
  };

  ScriptedChatBackend(std::string id, std::vector<Rule> rules,
                      std::optional<std::string> default_response = std::nullopt,
                      Capabilities caps = {true, true});

  static ScriptedChatBackend from_yaml(const std::string& text);
  static ScriptedChatBackend from_file(const std::filesystem::path& path);

  std::string complete(std::span<const ChatMessage> messages) const override;
  Capabilities capabilities() const override { return caps_; }
  std::string id() const override { return id_; }

 private:
  std::string id_;
  std::vector<Rule> rules_;
  std::optional<std::string> default_response_;
  Capabilities caps_;
};

struct HttpBackendConfig {
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string model;
  std::string api_key;   // resolved secret, never persisted
  std::chrono::seconds timeout{60};
  int max_retries = 2;
  bool vision = false;
};

/// Chat-completions style HTTP endpoint (POST {base_url}/chat/completions).
class HttpChatBackend final : public ChatBackend {
 public:
  explicit HttpChatBackend(HttpBackendConfig config);

  std::string complete(std::span<const ChatMessage> messages) const override;
  Capabilities capabilities() const override { return {true, config_.vision}; }
  std::string id() const override { return "http:" + config_.model; }

 private:
  HttpBackendConfig config_;
};

struct ParsedUrl {
  std::string scheme_host_port;
  std::string path_prefix;
};
ParsedUrl parse_base_url(const std::string& url);

// POST a JSON body with retries; returns the response body. Shared by the
// chat and embedding transports.
std::string post_json(const HttpBackendConfig& config, const std::string& path,
                      const std::string& body);

}  // namespace aerodesign
