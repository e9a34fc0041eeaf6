#include "aerodesign/knowledge.hpp"

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <tuple>

#include <json.hpp>

#include "aerodesign/csv.hpp"
#include "aerodesign/error.hpp"
#include "aerodesign/util.hpp"

namespace aerodesign {

using nlohmann::json;

namespace {

bool is_continuation_byte(char c) {
  return (static_cast<unsigned char>(c) & 0xC0U) == 0x80U;
}

// Position just past the last paragraph or sentence boundary in
// text[begin, limit), or npos.
std::size_t preferred_cut(std::string_view text, std::size_t begin, std::size_t limit) {
  const std::string_view window = text.substr(begin, limit - begin);
  if (const auto para = window.rfind("\n\n"); para != std::string_view::npos && para > 0) {
    std::size_t cut = begin + para + 2;
    while (cut < limit && text[cut] == '\n') ++cut;
    return cut;
  }
  std::size_t best = std::string_view::npos;
  for (std::size_t i = window.size() - 1; i > 0; --i) {
    const char c = window[i - 1];
    const char next = window[i];
    if ((c == '.' || c == '!' || c == '?') && (next == ' ' || next == '\n')) {
      best = begin + i + 1;
      break;
    }
  }
  return best;
}

std::string chunk_id_for(const std::string& doc, std::size_t index) {
  std::string n = std::to_string(index);
  if (n.size() < 4) n.insert(0, 4 - n.size(), '0');
  return doc + "#" + n;
}

const std::string kFormatInstruction =
    "Format your output as a JSON array. Each element of the array is an object with the "
    "string fields \"node_1\" (a concept from the extracted ontology), \"node_2\" (a related "
    "concept from the extracted ontology) and \"edge\" (the relationship between node_1 and "
    "node_2 in one or two sentences). Reply with the JSON array only.";

struct EdgeKey {
  std::string a, b, label;
  auto operator<=>(const EdgeKey&) const = default;
};

EdgeKey edge_key(std::string n1, std::string n2, std::string label) {
  if (n2 < n1) std::swap(n1, n2);
  return {std::move(n1), std::move(n2), std::move(label)};
}

KnowledgeGraph assemble(std::map<EdgeKey, std::vector<std::string>> grouped,
                        std::map<std::string, Embedding> embeddings = {}) {
  std::set<std::string> nodes;
  std::vector<KgEdge> edges;
  for (auto& [key, prov] : grouped) {
    std::sort(prov.begin(), prov.end());
    nodes.insert(key.a);
    nodes.insert(key.b);
    edges.push_back(KgEdge{key.a, key.b, key.label, prov.size(), std::move(prov)});
  }
  std::erase_if(embeddings, [&](const auto& kv) { return !nodes.contains(kv.first); });
  return KnowledgeGraph(std::move(nodes), std::move(edges), std::move(embeddings));
}

}  // namespace

std::vector<DocumentChunk> chunk_document(std::string_view text, const std::string& source_doc,
                                          std::size_t chunk_size) {
  if (chunk_size == 0) throw Error(errc::domain, "chunk_size must be positive");
  std::vector<DocumentChunk> out;
  std::size_t begin = 0;
  while (begin < text.size()) {
    std::size_t end = text.size();
    if (text.size() - begin > chunk_size) {
      const std::size_t limit = begin + chunk_size;
      end = preferred_cut(text, begin, limit);
      if (end == std::string_view::npos || end <= begin || end > limit) {
        end = limit;
        while (end > begin + 1 && is_continuation_byte(text[end])) --end;
      }
    }
    out.push_back(DocumentChunk{chunk_id_for(source_doc, out.size()), source_doc, begin, end,
                                std::string(text.substr(begin, end - begin))});
    begin = end;
  }
  return out;
}

Extraction parse_triples(std::string_view response, const std::string& chunk_id) {
  const auto open = response.find('[');
  const auto close = response.rfind(']');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    throw Error(errc::unparseable, "no JSON array in extractor response");
  }
  json parsed;
  try {
    parsed = json::parse(response.substr(open, close - open + 1));
  } catch (const json::exception& e) {
    throw Error(errc::unparseable, std::string("extractor response is not JSON: ") + e.what());
  }
  Extraction out;
  auto field = [](const json& obj, const char* a, const char* b) -> std::string {
    for (const char* key : {a, b}) {
      if (obj.contains(key) && obj[key].is_string()) return obj[key].get<std::string>();
    }
    return {};
  };
  for (const auto& entry : parsed) {
    if (!entry.is_object()) {
      ++out.warnings;
      continue;
    }
    Triple t{normalize_concept(field(entry, "node_1", "node1")),
             normalize_concept(field(entry, "node_2", "node2")),
             trim(field(entry, "edge", "relationship")), chunk_id};
    if (t.node1.empty() || t.node2.empty() || t.edge.empty() || t.node1 == t.node2) {
      ++out.warnings;
      continue;
    }
    out.triples.push_back(std::move(t));
  }
  return out;
}

Extraction extract_triples(const DocumentChunk& chunk, const ChatBackend& extractor,
                           const std::string& ontologist_prompt) {
  std::vector<ChatMessage> messages{
      {Role::system, ontologist_prompt + "\n\n" + kFormatInstruction, std::nullopt},
      {Role::user, "context: ```" + chunk.text + "```\n\noutput: ", std::nullopt}};
  std::string last_error;
  for (int attempt = 1; attempt <= 3; ++attempt) {
    const std::string reply = extractor.complete(messages);
    try {
      Extraction out = parse_triples(reply, chunk.chunk_id);
      out.attempts = attempt;
      return out;
    } catch (const Error& e) {
      if (e.code() != errc::unparseable) throw;
      last_error = e.what();
    }
    messages.push_back({Role::assistant, reply, std::nullopt});
    messages.push_back({Role::user,
                        "Your previous reply could not be parsed. " + kFormatInstruction,
                        std::nullopt});
  }
  throw Error(errc::unparseable,
              "unparseable response for " + chunk.chunk_id + " after 2 retries: " + last_error);
}

KnowledgeGraph::KnowledgeGraph(std::set<std::string> nodes, std::vector<KgEdge> edges,
                               std::map<std::string, Embedding> embeddings)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), embeddings_(std::move(embeddings)) {
  for (auto& e : edges_) {
    if (e.node2 < e.node1) std::swap(e.node1, e.node2);
    if (e.node1.empty() || e.node2.empty() || e.label.empty()) {
      throw Error(errc::schema, "edge with an empty field");
    }
    if (e.node1 == e.node2) throw Error(errc::schema, "self-loop on '" + e.node1 + "'");
    if (!nodes_.contains(e.node1) || !nodes_.contains(e.node2)) {
      throw Error(errc::schema, "edge endpoint missing from node set");
    }
    if (e.weight < 1 || e.weight != e.provenance.size()) {
      throw Error(errc::schema, "edge weight must equal its provenance count");
    }
    std::sort(e.provenance.begin(), e.provenance.end());
  }
  std::sort(edges_.begin(), edges_.end(), [](const KgEdge& a, const KgEdge& b) {
    return std::tie(a.node1, a.node2, a.label) < std::tie(b.node1, b.node2, b.label);
  });
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (edges_[i - 1].node1 == edges_[i].node1 && edges_[i - 1].node2 == edges_[i].node2 &&
        edges_[i - 1].label == edges_[i].label) {
      throw Error(errc::schema, "duplicate edge");
    }
  }
}

std::map<std::string, std::size_t> KnowledgeGraph::degrees() const {
  std::map<std::string, std::size_t> deg;
  for (const auto& n : nodes_) deg[n] = 0;
  for (const auto& e : edges_) {
    ++deg[e.node1];
    ++deg[e.node2];
  }
  return deg;
}

std::vector<Triple> KnowledgeGraph::to_triples() const {
  std::vector<Triple> out;
  for (const auto& e : edges_) {
    for (const auto& c : e.provenance) out.push_back({e.node1, e.node2, e.label, c});
  }
  return out;
}

KnowledgeGraph consolidate(std::span<const Triple> triples, const Embedder& embedder,
                           double merge_threshold) {
  // Surface-form frequencies and the distinct names, in sorted order.
  std::map<std::string, std::size_t> freq;
  for (const auto& t : triples) {
    ++freq[t.node1];
    ++freq[t.node2];
  }
  std::vector<std::string> names;
  names.reserve(freq.size());
  for (const auto& kv : freq) names.push_back(kv.first);

  const std::vector<Embedding> vectors = embedder.embed(names);
  if (vectors.size() != names.size()) {
    throw Error(errc::backend, "embedder returned the wrong number of vectors");
  }
  for (const auto& v : vectors) {
    if (v.size() != vectors.front().size()) {
      throw Error(errc::dimension_mismatch, "embedder returned vectors of mixed dimension");
    }
  }

  std::vector<std::size_t> parent(names.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  };
  for (std::size_t i = 0; i < names.size(); ++i) {
    for (std::size_t j = i + 1; j < names.size(); ++j) {
      if (cosine_similarity(vectors[i], vectors[j]) >= merge_threshold) {
        const auto ri = find(i), rj = find(j);
        if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
      }
    }
  }

  // Canonical name per group: highest frequency, then smallest string.
  std::map<std::size_t, std::size_t> canonical;  // root -> index of canonical name
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto r = find(i);
    auto it = canonical.find(r);
    if (it == canonical.end()) {
      canonical.emplace(r, i);
    } else if (freq[names[i]] > freq[names[it->second]]) {
      it->second = i;  // names are sorted, so equal counts keep the earlier one
    }
  }
  std::map<std::string, std::string> rename;
  std::map<std::string, Embedding> embeddings;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto c = canonical.at(find(i));
    rename[names[i]] = names[c];
    if (c == i) embeddings[names[i]] = vectors[i];
  }

  std::map<EdgeKey, std::vector<std::string>> grouped;
  for (const auto& t : triples) {
    const auto& a = rename.at(t.node1);
    const auto& b = rename.at(t.node2);
    if (a == b) continue;
    grouped[edge_key(a, b, t.edge)].push_back(t.chunk_id);
  }
  return assemble(std::move(grouped), std::move(embeddings));
}

KnowledgeGraph filter_by_degree(const KnowledgeGraph& kg, std::size_t min_degree) {
  if (min_degree == 0) return kg;
  const auto deg = kg.degrees();
  std::set<std::string> kept;
  for (const auto& [n, d] : deg) {
    if (d >= min_degree) kept.insert(n);
  }
  std::vector<KgEdge> edges;
  std::set<std::string> nodes;
  for (const auto& e : kg.edges()) {
    if (kept.contains(e.node1) && kept.contains(e.node2)) {
      edges.push_back(e);
      nodes.insert(e.node1);
      nodes.insert(e.node2);
    }
  }
  std::map<std::string, Embedding> emb;
  for (const auto& [n, v] : kg.embeddings()) {
    if (nodes.contains(n)) emb.emplace(n, v);
  }
  return KnowledgeGraph(std::move(nodes), std::move(edges), std::move(emb));
}

std::string export_csv(const KnowledgeGraph& kg) {
  std::string out = "node_1,node_2,edge,weight,chunk_ids\n";
  for (const auto& e : kg.edges()) {
    std::string ids;
    for (std::size_t i = 0; i < e.provenance.size(); ++i) {
      if (i) ids += ';';
      ids += e.provenance[i];
    }
    out += csv::format_row({e.node1, e.node2, e.label, std::to_string(e.weight), ids});
    out += '\n';
  }
  return out;
}

KnowledgeGraph import_csv(std::string_view content) {
  const auto records = csv::parse(content);
  if (records.empty()) throw Error(errc::schema, "KG CSV is empty (missing header)");
  const csv::Row expected{"node_1", "node_2", "edge", "weight", "chunk_ids"};
  if (records.front().fields != expected) {
    throw Error(errc::schema, "KG CSV header must be node_1,node_2,edge,weight,chunk_ids");
  }
  std::set<std::string> nodes;
  std::vector<KgEdge> edges;
  std::set<EdgeKey> seen;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::string where = "row " + std::to_string(r) + " (line " + std::to_string(rec.line) + ")";
    if (rec.fields.size() != 5) throw Error(errc::schema, where + ": expected 5 fields");
    const auto& f = rec.fields;
    if (f[0].empty()) throw Error(errc::schema, where + ": edge references a missing node_1");
    if (f[1].empty()) throw Error(errc::schema, where + ": edge references a missing node_2");
    if (f[0] == f[1]) throw Error(errc::schema, where + ": self-loop");
    if (f[2].empty()) throw Error(errc::schema, where + ": empty edge label");
    std::size_t weight = 0;
    try {
      std::size_t used = 0;
      const long long w = std::stoll(f[3], &used);
      if (used != f[3].size() || w < 1) throw std::invalid_argument("weight");
      weight = static_cast<std::size_t>(w);
    } catch (const std::exception&) {
      throw Error(errc::schema, where + ": weight must be a positive integer");
    }
    std::vector<std::string> prov;
    if (!f[4].empty()) {
      std::size_t start = 0;
      while (true) {
        const auto semi = f[4].find(';', start);
        prov.push_back(f[4].substr(start, semi - start));
        if (semi == std::string::npos) break;
        start = semi + 1;
      }
    }
    if (prov.size() != weight) {
      throw Error(errc::schema, where + ": weight " + f[3] + " does not match " +
                                    std::to_string(prov.size()) + " chunk ids");
    }
    KgEdge e{f[0], f[1], f[2], weight, std::move(prov)};
    if (e.node2 < e.node1) std::swap(e.node1, e.node2);
    if (!seen.insert(edge_key(e.node1, e.node2, e.label)).second) {
      throw Error(errc::schema, where + ": duplicate edge");
    }
    nodes.insert(e.node1);
    nodes.insert(e.node2);
    edges.push_back(std::move(e));
  }
  return KnowledgeGraph(std::move(nodes), std::move(edges));
}

KgBuildReport build_kg(std::span<const CorpusDocument> corpus, const std::string& ontologist_prompt,
                       const ChatBackend& extractor, const Embedder& embedder,
                       std::size_t chunk_size, double merge_threshold) {
  KgBuildReport report;
  std::vector<Triple> triples;
  for (const auto& doc : corpus) {
    for (const auto& chunk : chunk_document(doc.text, doc.name, chunk_size)) {
      ++report.chunks;
      auto ex = extract_triples(chunk, extractor, ontologist_prompt);
      report.warnings += ex.warnings;
      triples.insert(triples.end(), ex.triples.begin(), ex.triples.end());
    }
  }
  report.raw_triples = triples.size();
  if (triples.empty()) {
    report.graph = KnowledgeGraph();
  } else {
    report.graph = consolidate(triples, embedder, merge_threshold);
  }
  return report;
}

std::vector<CorpusDocument> load_corpus(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(errc::io, "corpus directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto ext = entry.path().extension().string();
    if (entry.is_regular_file() && (ext == ".md" || ext == ".txt")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<CorpusDocument> docs;
  for (const auto& f : files) {
    docs.push_back({f.stem().string(), read_file(f)});
  }
  return docs;
}

}  // namespace aerodesign
