#include "aerodesign/chat.hpp"

#include <algorithm>
#include <regex>
#include <thread>

#include <httplib.h>
#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "aerodesign/error.hpp"
#include "aerodesign/util.hpp"

namespace aerodesign {

using nlohmann::json;

std::string to_string(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

ScriptedChatBackend::ScriptedChatBackend(std::string id, std::vector<Rule> rules,
                                         std::optional<std::string> default_response,
                                         Capabilities caps)
    : id_(std::move(id)),
      rules_(std::move(rules)),
      default_response_(std::move(default_response)),
      caps_(caps) {
  for (const auto& r : rules_) {
    if (r.regex) {
      try {
        std::regex probe(*r.regex, std::regex::icase);
      } catch (const std::regex_error& e) {
        throw Error(errc::config_invalid, "scripted rule regex '" + *r.regex + "': " + e.what());
      }
    }
  }
}

ScriptedChatBackend ScriptedChatBackend::from_yaml(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw Error(errc::config_invalid, std::string("chat script: ") + e.what());
  }
  if (!root.IsMap()) throw Error(errc::config_invalid, "chat script must be a mapping");
  std::string id = root["id"] ? root["id"].as<std::string>() : "scripted";
  Capabilities caps{true, true};
  if (root["capabilities"]) {
    caps = {false, false};
    for (const auto& c : root["capabilities"]) {
      const auto name = c.as<std::string>();
      if (name == "text") caps.text = true;
      else if (name == "vision") caps.vision = true;
      else throw Error(errc::config_invalid, "unknown capability '" + name + "'");
    }
  }
  std::vector<Rule> rules;
  if (root["rules"]) {
    for (const auto& node : root["rules"]) {
      Rule r;
      if (const auto c = node["contains"]) {
        if (c.IsSequence()) {
          for (const auto& s : c) r.contains.push_back(s.as<std::string>());
        } else {
          r.contains.push_back(c.as<std::string>());
        }
      }
      if (node["regex"]) r.regex = node["regex"].as<std::string>();
      if (node["scope"]) {
        const auto s = node["scope"].as<std::string>();
        if (s == "all") r.scope = Scope::all;
        else if (s == "last_user") r.scope = Scope::last_user;
        else if (s == "system") r.scope = Scope::system;
        else throw Error(errc::config_invalid, "unknown rule scope '" + s + "'");
      }
      if (node["response"]) r.response = node["response"].as<std::string>();
      if (node["fail"]) r.fail = node["fail"].as<bool>();
      if (!r.fail && !node["response"]) {
        throw Error(errc::config_invalid, "scripted rule without response");
      }
      rules.push_back(std::move(r));
    }
  }
  std::optional<std::string> fallback;
  if (root["default"]) fallback = root["default"].as<std::string>();
  return ScriptedChatBackend(std::move(id), std::move(rules), std::move(fallback), caps);
}

ScriptedChatBackend ScriptedChatBackend::from_file(const std::filesystem::path& path) {
  return from_yaml(read_file(path));
}

std::string ScriptedChatBackend::complete(std::span<const ChatMessage> messages) const {
  std::string all, last_user, system;
  for (const auto& m : messages) {
    all += m.content;
    all += '\n';
    if (m.role == Role::user) last_user = m.content;
    if (m.role == Role::system) system += m.content + '\n';
  }
  const std::string all_l = to_lower(all);
  const std::string user_l = to_lower(last_user);
  const std::string system_l = to_lower(system);

  for (const auto& rule : rules_) {
    const std::string& hay = rule.scope == Scope::all         ? all_l
                             : rule.scope == Scope::last_user ? user_l
                                                              : system_l;
    const bool hit_contains = std::all_of(
        rule.contains.begin(), rule.contains.end(),
        [&](const std::string& needle) { return hay.find(to_lower(needle)) != std::string::npos; });
    if (!hit_contains) continue;
    if (rule.regex && !std::regex_search(hay, std::regex(*rule.regex, std::regex::icase))) {
      continue;
    }
    if (rule.fail) throw Error(errc::backend, id_ + ": scripted transport failure");
    return rule.response;
  }
  if (default_response_) return *default_response_;
  throw Error(errc::backend, id_ + ": no scripted rule matched");
}

ParsedUrl parse_base_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(errc::config_invalid, "base_url needs a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, ""};
  std::string prefix = url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, path_start), prefix};
}

std::string post_json(const HttpBackendConfig& config, const std::string& path,
                      const std::string& body) {
  const ParsedUrl url = parse_base_url(config.base_url);
  std::string last_error;
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(250 << attempt));
    try {
      httplib::Client client(url.scheme_host_port);
      client.set_connection_timeout(config.timeout);
      client.set_read_timeout(config.timeout);
      client.set_write_timeout(config.timeout);
      httplib::Headers headers;
      if (!config.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config.api_key);
      }
      auto res = client.Post(url.path_prefix + path, headers, body, "application/json");
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 500 || res->status == 429) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status >= 400) {
        throw Error(errc::backend, "HTTP " + std::to_string(res->status) + ": " + res->body);
      }
      return res->body;
    } catch (const std::invalid_argument& e) {
      throw Error(errc::config_invalid, std::string("base_url: ") + e.what());
    }
  }
  throw Error(errc::backend, "request to " + config.base_url + path + " failed: " + last_error);
}

HttpChatBackend::HttpChatBackend(HttpBackendConfig config) : config_(std::move(config)) {
  parse_base_url(config_.base_url);
  if (config_.model.empty()) throw Error(errc::config_invalid, "chat backend needs a model");
}

std::string HttpChatBackend::complete(std::span<const ChatMessage> messages) const {
  json body = {{"model", config_.model}, {"temperature", 0}};
  json msgs = json::array();
  for (const auto& m : messages) {
    if (m.image && config_.vision) {
      const std::string data_url =
          "data:" + m.image->mime + ";base64," + base64_encode(m.image->data);
      msgs.push_back({{"role", to_string(m.role)},
                      {"content", json::array({{{"type", "text"}, {"text", m.content}},
                                               {{"type", "image_url"},
                                                {"image_url", {{"url", data_url}}}}})}});
    } else {
      msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    }
  }
  body["messages"] = std::move(msgs);
  const std::string response = post_json(config_, "/chat/completions", body.dump());
  try {
    const json parsed = json::parse(response);
    return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(errc::backend, std::string("malformed chat-completions response: ") + e.what());
  }
}

}  // namespace aerodesign
