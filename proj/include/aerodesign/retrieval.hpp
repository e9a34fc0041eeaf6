#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aerodesign/chat.hpp"
#include "aerodesign/embedding.hpp"

namespace aerodesign {

struct KgChunk {
  std::string chunk_id;    // "<source_ref>:<first_row>-<last_row>", rows zero-padded
  std::string source_ref;  // identity of the KG file
  std::size_t first_row = 0;  // 1-based data-row range, inclusive
  std::size_t last_row = 0;
  std::string text;        // header line followed by the rows

  friend bool operator==(const KgChunk&, const KgChunk&) = default;
};

struct EmbeddedChunk {
  KgChunk chunk;
  Embedding vector;

  friend bool operator==(const EmbeddedChunk&, const EmbeddedChunk&) = default;
};

inline constexpr std::size_t kDefaultRowsPerChunk = 30;
inline constexpr std::size_t kDefaultTopK = 5;

// Splits a KG CSV into groups of rows_per_chunk data rows, repeating the
// header in every chunk. Throws Error(csv.malformed) on bad CSV.
std::vector<KgChunk> chunk_kg_csv(std::string_view csv_content, const std::string& source_ref,
                                  std::size_t rows_per_chunk = kDefaultRowsPerChunk);

/// In-memory exhaustive cosine index. Immutable once built.
class VectorStore {
 public:
  VectorStore(std::size_t dimension, std::string embedder_id,
              std::vector<EmbeddedChunk> entries = {});

  std::size_t dimension() const noexcept { return dimension_; }
  const std::string& embedder_id() const noexcept { return embedder_id_; }
  const std::vector<EmbeddedChunk>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  // Single file: a JSON header line {format_version, dimension, embedder_id}
  // then one JSON line per chunk with its vector as base64 little-endian f32.
  void save(const std::filesystem::path& path) const;
  static VectorStore load(const std::filesystem::path& path);
  std::string serialize() const;
  static VectorStore deserialize(std::string_view content);

  friend bool operator==(const VectorStore&, const VectorStore&) = default;

 private:
  std::size_t dimension_;
  std::string embedder_id_;
  std::vector<EmbeddedChunk> entries_;
};

// Embeds every chunk. An empty chunk list gives an empty store whose
// dimension is 0. Throws Error(retrieval.dimension_mismatch) when vectors
// differ in length.
VectorStore index(std::span<const KgChunk> chunks, const Embedder& embedder);

struct Hit {
  const EmbeddedChunk* entry = nullptr;
  double score = 0.0;
};

// min(k, size) entries by descending cosine similarity, ties by chunk_id.
std::vector<Hit> top_k(const VectorStore& store, std::span<const float> query, std::size_t k);

struct QueryRewrite {
  std::string query;
  bool fell_back = false;
  std::string warning;
};

// Asks the backend for a search query; on any backend failure the original
// prompt is returned and the failure is reported in `warning`.
QueryRewrite rewrite_query(const std::string& user_prompt, const ChatBackend& backend);

// Retrieved context block with chunk-id citations, then the original prompt.
// With no chunks the prompt is returned unchanged.
std::string augment_prompt(const std::string& user_prompt, std::span<const Hit> hits);

struct Retrieval {
  std::string query;
  std::vector<Hit> hits;
  std::vector<std::string> chunk_ids;
  std::vector<std::string> warnings;
};

// rewrite_query -> embed -> top_k. Returns no hits for an empty store.
Retrieval retrieve(const std::string& prompt, const VectorStore& store, const Embedder& embedder,
                   const ChatBackend* rewriter, std::size_t k = kDefaultTopK);

}  // namespace aerodesign
