#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aerodesign/chat.hpp"
#include "aerodesign/embedding.hpp"

namespace aerodesign {

struct DocumentChunk {
  std::string chunk_id;    // "<source_doc>#<index>", index zero-padded to 4 digits
  std::string source_doc;
  std::size_t begin = 0;   // byte offsets into the source text, [begin, end)
  std::size_t end = 0;
  std::string text;

  friend bool operator==(const DocumentChunk&, const DocumentChunk&) = default;
};

inline constexpr std::size_t kDefaultChunkSize = 3000;

// Splits text into consecutive chunks of at most chunk_size bytes. Each cut is
// placed after the last paragraph break ("\n\n") inside the window, else after
// the last sentence end (". ", "! ", "? " or a period before a newline), else
// at the window edge moved back to a UTF-8 character boundary. Concatenating
// the chunk texts gives the input back.
std::vector<DocumentChunk> chunk_document(std::string_view text, const std::string& source_doc,
                                          std::size_t chunk_size = kDefaultChunkSize);

struct Triple {
  std::string node1;
  std::string node2;
  std::string edge;
  std::string chunk_id;

  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct Extraction {
  std::vector<Triple> triples;
  std::size_t warnings = 0;  // malformed or self-referencing entries dropped
  int attempts = 0;
};

// Parses a JSON array of {"node_1", "node_2", "edge"} objects (node1/node2 are
// accepted too) out of a model response. Node strings are normalised with
// normalize_concept. Throws Error(backend.unparseable) when no JSON array can
// be read.
Extraction parse_triples(std::string_view response, const std::string& chunk_id);

// Sends one chunk to the extractor and parses the reply, re-asking with the
// format restated up to two more times when the reply is unparseable.
Extraction extract_triples(const DocumentChunk& chunk, const ChatBackend& extractor,
                           const std::string& ontologist_prompt);

struct KgEdge {
  std::string node1;  // node1 < node2; edges are undirected
  std::string node2;
  std::string label;
  std::size_t weight = 0;
  std::vector<std::string> provenance;  // chunk ids, sorted, one per supporting triple

  friend bool operator==(const KgEdge&, const KgEdge&) = default;
};

/// Undirected, edge-labelled concept graph. Edges are kept sorted by
/// (node1, node2, label); every endpoint is a node and every weight equals
/// its provenance count. Node embeddings, when present, are informational
/// and take no part in equality.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;
  // Throws Error(schema) when an invariant does not hold.
  KnowledgeGraph(std::set<std::string> nodes, std::vector<KgEdge> edges,
                 std::map<std::string, Embedding> embeddings = {});

  const std::set<std::string>& nodes() const noexcept { return nodes_; }
  const std::vector<KgEdge>& edges() const noexcept { return edges_; }
  const std::map<std::string, Embedding>& embeddings() const noexcept { return embeddings_; }

  std::map<std::string, std::size_t> degrees() const;
  // One triple per provenance entry, the inverse of consolidation.
  std::vector<Triple> to_triples() const;

  friend bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  std::set<std::string> nodes_;
  std::vector<KgEdge> edges_;
  std::map<std::string, Embedding> embeddings_;
};

inline constexpr double kDefaultMergeThreshold = 0.90;

// Merges concept nodes whose embeddings have cosine >= merge_threshold
// (transitively), naming each group after its most frequent surface form
// (ties to the lexicographically smallest). Edges are keyed by
// (unordered endpoint pair, label); the weight counts supporting triples.
// Self-loops created by merging and nodes left without edges are dropped.
KnowledgeGraph consolidate(std::span<const Triple> triples, const Embedder& embedder,
                           double merge_threshold = kDefaultMergeThreshold);

// Keeps nodes of degree >= min_degree and the edges between them, then drops
// nodes left without edges.
KnowledgeGraph filter_by_degree(const KnowledgeGraph& kg, std::size_t min_degree = 10);

// `node_1,node_2,edge,weight,chunk_ids` with chunk ids joined by ';'.
std::string export_csv(const KnowledgeGraph& kg);
KnowledgeGraph import_csv(std::string_view content);

struct KgBuildReport {
  KnowledgeGraph graph;
  std::size_t chunks = 0;
  std::size_t raw_triples = 0;
  std::size_t warnings = 0;
};

struct CorpusDocument {
  std::string name;
  std::string text;
};

// chunk_document -> extract_triples -> consolidate over a corpus.
KgBuildReport build_kg(std::span<const CorpusDocument> corpus, const std::string& ontologist_prompt,
                       const ChatBackend& extractor, const Embedder& embedder,
                       std::size_t chunk_size = kDefaultChunkSize,
                       double merge_threshold = kDefaultMergeThreshold);

// Reads *.md and *.txt files of a directory, sorted by file name.
std::vector<CorpusDocument> load_corpus(const std::filesystem::path& dir);

}  // namespace aerodesign
