#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "aerodesign/chat.hpp"

namespace aerodesign {

using Embedding = std::vector<float>;

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<Embedding> embed(std::span<const std::string> texts) const = 0;
  virtual std::string id() const = 0;
};

// Cosine of the angle between a and b; 0 when either has zero norm.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

/// Feature-hashing bag of words (plus character trigrams), L2-normalised.
/// Local and deterministic; useful when no embedding service is configured.
class HashingEmbedder final : public Embedder {
 public:
  explicit HashingEmbedder(std::size_t dimension = 256);
  std::vector<Embedding> embed(std::span<const std::string> texts) const override;
  std::string id() const override;

 private:
  std::size_t dimension_;
};

/// Table lookup by exact text, falling back to a HashingEmbedder of the same
/// dimension for texts not in the table.
class ScriptedEmbedder final : public Embedder {
 public:
  ScriptedEmbedder(std::string id, std::map<std::string, Embedding> table,
                   std::size_t fallback_dimension);

  /// YAML: { id: ..., dimension: N, vectors: { "text": [..], ... } }
  static ScriptedEmbedder from_yaml(const std::string& text);
  static ScriptedEmbedder from_file(const std::filesystem::path& path);

  std::vector<Embedding> embed(std::span<const std::string> texts) const override;
  std::string id() const override { return id_; }

 private:
  std::string id_;
  std::map<std::string, Embedding> table_;
  HashingEmbedder fallback_;
};

/// OpenAI-style POST {base_url}/embeddings.
class HttpEmbedder final : public Embedder {
 public:
  explicit HttpEmbedder(HttpBackendConfig config);
  std::vector<Embedding> embed(std::span<const std::string> texts) const override;
  std::string id() const override { return "http:" + config_.model; }

 private:
  HttpBackendConfig config_;
};

}  // namespace aerodesign
