#include "aerodesign/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include <json.hpp>

#include "aerodesign/csv.hpp"
#include "aerodesign/error.hpp"
#include "aerodesign/util.hpp"

namespace aerodesign {

using nlohmann::json;

namespace {

constexpr int kStoreFormatVersion = 1;

std::string pad_row(std::size_t row) {
  std::string s = std::to_string(row);
  if (s.size() < 6) s.insert(0, 6 - s.size(), '0');
  return s;
}

std::string encode_vector(const Embedding& v) {
  std::vector<std::uint8_t> bytes(v.size() * 4);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(v[i]);
    for (int b = 0; b < 4; ++b) bytes[i * 4 + b] = static_cast<std::uint8_t>(bits >> (8 * b));
  }
  return base64_encode(bytes);
}

Embedding decode_vector(const std::string& text, std::size_t dimension) {
  const auto bytes = base64_decode(text);
  if (bytes.size() != dimension * 4) {
    throw Error(errc::dimension_mismatch, "stored vector length does not match the header");
  }
  Embedding v(dimension);
  for (std::size_t i = 0; i < dimension; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[i * 4 + b]) << (8 * b);
    v[i] = std::bit_cast<float>(bits);
  }
  return v;
}

}  // namespace

std::vector<KgChunk> chunk_kg_csv(std::string_view csv_content, const std::string& source_ref,
                                  std::size_t rows_per_chunk) {
  if (rows_per_chunk == 0) throw Error(errc::domain, "rows_per_chunk must be at least 1");
  const auto records = csv::parse(csv_content);
  if (records.empty()) throw Error(errc::csv_malformed, "KG CSV has no header");
  const std::string& header = records.front().raw;
  std::vector<KgChunk> out;
  const std::size_t rows = records.size() - 1;
  for (std::size_t first = 1; first <= rows; first += rows_per_chunk) {
    const std::size_t last = std::min(rows, first + rows_per_chunk - 1);
    std::string text = header + "\n";
    for (std::size_t r = first; r <= last; ++r) text += records[r].raw + "\n";
    out.push_back(KgChunk{source_ref + ":" + pad_row(first) + "-" + pad_row(last), source_ref,
                          first, last, std::move(text)});
  }
  return out;
}

VectorStore::VectorStore(std::size_t dimension, std::string embedder_id,
                         std::vector<EmbeddedChunk> entries)
    : dimension_(dimension), embedder_id_(std::move(embedder_id)), entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (e.vector.size() != dimension_) {
      throw Error(errc::dimension_mismatch,
                  "chunk " + e.chunk.chunk_id + " has dimension " + std::to_string(e.vector.size()) +
                      ", store declares " + std::to_string(dimension_));
    }
  }
}

std::string VectorStore::serialize() const {
  std::string out = json{{"format_version", kStoreFormatVersion},
                         {"dimension", dimension_},
                         {"embedder_id", embedder_id_}}
                        .dump();
  out += '\n';
  for (const auto& e : entries_) {
    out += json{{"chunk_id", e.chunk.chunk_id},
                {"source_ref", e.chunk.source_ref},
                {"row_range", {e.chunk.first_row, e.chunk.last_row}},
                {"text", e.chunk.text},
                {"vector", encode_vector(e.vector)}}
               .dump();
    out += '\n';
  }
  return out;
}

VectorStore VectorStore::deserialize(std::string_view content) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < content.size()) {
    auto nl = content.find('\n', start);
    if (nl == std::string_view::npos) nl = content.size();
    if (nl > start) lines.push_back(content.substr(start, nl - start));
    start = nl + 1;
  }
  if (lines.empty()) throw Error(errc::schema, "vector store file is empty");
  try {
    const json header = json::parse(lines.front());
    if (header.at("format_version").get<int>() != kStoreFormatVersion) {
      throw Error(errc::schema, "unsupported vector store format version");
    }
    const auto dim = header.at("dimension").get<std::size_t>();
    std::vector<EmbeddedChunk> entries;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const json rec = json::parse(lines[i]);
      KgChunk c{rec.at("chunk_id").get<std::string>(), rec.at("source_ref").get<std::string>(),
                rec.at("row_range").at(0).get<std::size_t>(),
                rec.at("row_range").at(1).get<std::size_t>(), rec.at("text").get<std::string>()};
      entries.push_back({std::move(c), decode_vector(rec.at("vector").get<std::string>(), dim)});
    }
    return VectorStore(dim, header.at("embedder_id").get<std::string>(), std::move(entries));
  } catch (const json::exception& e) {
    throw Error(errc::schema, std::string("malformed vector store: ") + e.what());
  }
}

void VectorStore::save(const std::filesystem::path& path) const {
  write_file_atomic(path, serialize());
}

VectorStore VectorStore::load(const std::filesystem::path& path) {
  return deserialize(read_file(path));
}

VectorStore index(std::span<const KgChunk> chunks, const Embedder& embedder) {
  if (chunks.empty()) return VectorStore(0, embedder.id());
  std::vector<std::string> texts;
  texts.reserve(chunks.size());
  for (const auto& c : chunks) texts.push_back(c.text);
  auto vectors = embedder.embed(texts);
  if (vectors.size() != chunks.size()) {
    throw Error(errc::backend, "embedder returned the wrong number of vectors");
  }
  std::vector<EmbeddedChunk> entries;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    entries.push_back({chunks[i], std::move(vectors[i])});
  }
  const std::size_t dim = entries.front().vector.size();
  return VectorStore(dim, embedder.id(), std::move(entries));
}

std::vector<Hit> top_k(const VectorStore& store, std::span<const float> query, std::size_t k) {
  if (k == 0) throw Error(errc::domain, "k must be at least 1");
  if (store.empty()) return {};
  if (query.size() != store.dimension()) {
    throw Error(errc::dimension_mismatch, "query dimension " + std::to_string(query.size()) +
                                              " does not match store dimension " +
                                              std::to_string(store.dimension()));
  }
  std::vector<Hit> hits;
  hits.reserve(store.size());
  for (const auto& e : store.entries()) hits.push_back({&e, cosine_similarity(e.vector, query)});
  const auto better = [](const Hit& a, const Hit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.entry->chunk.chunk_id < b.entry->chunk.chunk_id;
  };
  const std::size_t n = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(n), hits.end(), better);
  hits.resize(n);
  return hits;
}

QueryRewrite rewrite_query(const std::string& user_prompt, const ChatBackend& backend) {
  const std::vector<ChatMessage> messages{
      {Role::system,
       "Rewrite the user's request as a short search query for a knowledge base about airfoil "
       "design. Reply with the query only.",
       std::nullopt},
      {Role::user, user_prompt, std::nullopt}};
  try {
    std::string q = trim(backend.complete(messages));
    if (q.empty()) return {user_prompt, true, "query rewrite returned an empty query"};
    return {std::move(q), false, {}};
  } catch (const std::exception& e) {
    return {user_prompt, true, std::string("query rewrite failed, using the prompt: ") + e.what()};
  }
}

std::string augment_prompt(const std::string& user_prompt, std::span<const Hit> hits) {
  if (hits.empty()) return user_prompt;
  std::string out = "Context retrieved from the knowledge graph:\n";
  for (const auto& h : hits) {
    out += "\n[" + h.entry->chunk.chunk_id + "]\n" + h.entry->chunk.text;
    if (out.back() != '\n') out += '\n';
  }
  out += "\nCite the chunk ids above when you rely on them.\n\n" + user_prompt;
  return out;
}

Retrieval retrieve(const std::string& prompt, const VectorStore& store, const Embedder& embedder,
                   const ChatBackend* rewriter, std::size_t k) {
  Retrieval r;
  r.query = prompt;
  if (rewriter) {
    auto rw = rewrite_query(prompt, *rewriter);
    r.query = rw.query;
    if (rw.fell_back) r.warnings.push_back(rw.warning);
  }
  if (store.empty()) return r;
  const auto qv = embedder.embed(std::span<const std::string>(&r.query, 1));
  r.hits = top_k(store, qv.front(), k);
  for (const auto& h : r.hits) r.chunk_ids.push_back(h.entry->chunk.chunk_id);
  return r;
}

}  // namespace aerodesign
