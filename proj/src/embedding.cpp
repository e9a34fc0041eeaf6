#include "aerodesign/embedding.hpp"

#include <cctype>
#include <cmath>

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "aerodesign/error.hpp"
#include "aerodesign/util.hpp"

namespace aerodesign {

using nlohmann::json;

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw Error(errc::dimension_mismatch, "cosine of vectors with different dimensions");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

HashingEmbedder::HashingEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw Error(errc::config_invalid, "embedding dimension must be positive");
}

std::string HashingEmbedder::id() const { return "hashing-" + std::to_string(dimension_); }

std::vector<Embedding> HashingEmbedder::embed(std::span<const std::string> texts) const {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    std::vector<double> v(dimension_, 0.0);
    auto add = [&](std::string_view feature, double weight) {
      const std::uint64_t h = fnv1a64(feature);
      const double sign = (h >> 63) ? -1.0 : 1.0;
      v[h % dimension_] += sign * weight;
    };
    std::string token;
    auto flush = [&] {
      if (token.empty()) return;
      add("w:" + token, 1.0);
      const std::string padded = " " + token + " ";
      for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
        add("c:" + padded.substr(i, 3), 0.5);
      }
      token.clear();
    };
    for (unsigned char c : text) {
      if (std::isalnum(c) || c >= 0x80) {
        token.push_back(static_cast<char>(std::tolower(c)));
      } else {
        flush();
      }
    }
    flush();
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    Embedding e(dimension_, 0.0F);
    if (norm > 0.0) {
      for (std::size_t i = 0; i < dimension_; ++i) e[i] = static_cast<float>(v[i] / norm);
    }
    out.push_back(std::move(e));
  }
  return out;
}

ScriptedEmbedder::ScriptedEmbedder(std::string id, std::map<std::string, Embedding> table,
                                   std::size_t fallback_dimension)
    : id_(std::move(id)), table_(std::move(table)), fallback_(fallback_dimension) {}

ScriptedEmbedder ScriptedEmbedder::from_yaml(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw Error(errc::config_invalid, std::string("embedding script: ") + e.what());
  }
  if (!root.IsMap() || !root["dimension"]) {
    throw Error(errc::config_invalid, "embedding script needs a dimension");
  }
  const auto dim = root["dimension"].as<std::size_t>();
  std::map<std::string, Embedding> table;
  if (root["vectors"]) {
    for (const auto& kv : root["vectors"]) {
      Embedding e;
      for (const auto& x : kv.second) e.push_back(x.as<float>());
      table.emplace(kv.first.as<std::string>(), std::move(e));
    }
  }
  return ScriptedEmbedder(root["id"] ? root["id"].as<std::string>() : "scripted-embedder",
                          std::move(table), dim);
}

ScriptedEmbedder ScriptedEmbedder::from_file(const std::filesystem::path& path) {
  return from_yaml(read_file(path));
}

std::vector<Embedding> ScriptedEmbedder::embed(std::span<const std::string> texts) const {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    if (auto it = table_.find(t); it != table_.end()) {
      out.push_back(it->second);
    } else {
      out.push_back(fallback_.embed(std::span<const std::string>(&t, 1)).front());
    }
  }
  return out;
}

HttpEmbedder::HttpEmbedder(HttpBackendConfig config) : config_(std::move(config)) {
  parse_base_url(config_.base_url);
  if (config_.model.empty()) throw Error(errc::config_invalid, "embedder needs a model");
}

std::vector<Embedding> HttpEmbedder::embed(std::span<const std::string> texts) const {
  if (texts.empty()) return {};
  json body = {{"model", config_.model}, {"input", json::array()}};
  for (const auto& t : texts) body["input"].push_back(t);
  const std::string response = post_json(config_, "/embeddings", body.dump());
  std::vector<Embedding> out(texts.size());
  try {
    const json parsed = json::parse(response);
    const auto& data = parsed.at("data");
    if (data.size() != texts.size()) {
      throw Error(errc::backend, "embedding response has the wrong number of vectors");
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto index = data[i].contains("index") ? data[i]["index"].get<std::size_t>() : i;
      if (index >= out.size()) throw Error(errc::backend, "embedding index out of range");
      out[index] = data[i].at("embedding").get<Embedding>();
    }
  } catch (const json::exception& e) {
    throw Error(errc::backend, std::string("malformed embeddings response: ") + e.what());
  }
  return out;
}

}  // namespace aerodesign
