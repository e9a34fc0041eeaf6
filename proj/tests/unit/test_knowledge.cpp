#include <doctest.h>

#include <random>

#include "aerodesign/chat.hpp"
#include "aerodesign/error.hpp"
#include "aerodesign/knowledge.hpp"
#include "aerodesign/resources.hpp"
#include "aerodesign/util.hpp"
#include "../support/helpers.hpp"
#include "../support/kg_fixtures.hpp"

using namespace aerodesign;

namespace {

bool matches_oracle(const KnowledgeGraph& kg, const oracle::Graph& g) {
  if (kg.nodes() != g.nodes || kg.edges().size() != g.edges.size()) return false;
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const auto& e = kg.edges()[i];
    const auto& o = g.edges[i];
    if (e.node1 != o.a || e.node2 != o.b || e.label != o.label || e.provenance != o.chunks) return false;
  }
  return true;
}

std::string random_text(std::mt19937_64& rng, std::size_t words) {
  static const std::vector<std::string> vocab{"lift", "drag", "wing", "é", "naca", "camber",
                                              "thickness", "σ", "flow"};
  std::string out;
  for (std::size_t i = 0; i < words; ++i) {
    out += vocab[rng() % vocab.size()];
    const auto r = rng() % 12;
    out += r == 0 ? ". " : r == 1 ? "\n\n" : r == 2 ? "! " : " ";
  }
  return out;
}

}  // namespace

TEST_SUITE("knowledge") {
  TEST_CASE("chunks cover the document exactly") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 50; ++trial) {
      const std::string text = random_text(rng, 50 + rng() % 400);
      const std::size_t size = 40 + rng() % 300;
      const auto chunks = chunk_document(text, "doc", size);
      std::string joined;
      std::size_t pos = 0;
      for (std::size_t i = 0; i < chunks.size(); ++i) {
        CHECK(chunks[i].begin == pos);
        CHECK(chunks[i].end > chunks[i].begin);
        CHECK(chunks[i].end - chunks[i].begin <= size);
        CHECK(chunks[i].text == text.substr(chunks[i].begin, chunks[i].end - chunks[i].begin));
        pos = chunks[i].end;
        joined += chunks[i].text;
      }
      CHECK(joined == text);
    }
  }

  TEST_CASE("chunk cuts prefer paragraph then sentence boundaries") {
    const std::string text = "First paragraph here.\n\nSecond one. It has two sentences.";
    const auto chunks = chunk_document(text, "d", 40);
    REQUIRE(chunks.size() == 2);
    CHECK(chunks[0].text == "First paragraph here.\n\n");
    CHECK(chunks[0].chunk_id == "d#0000");
    const auto sentences = chunk_document("One two three. Four five six seven.", "d", 20);
    CHECK(sentences[0].text == "One two three. ");
    CHECK(chunk_document("", "d", 10).empty());
    CHECK_THROWS_AS(chunk_document("abc", "d", 0), Error);
  }

  TEST_CASE("chunking never splits a UTF-8 character") {
    const std::string text = "ééééééééééé";  // two bytes each
    for (const auto& c : chunk_document(text, "d", 5)) CHECK(c.text.size() % 2 == 0);
  }

  TEST_CASE("triple parsing") {
    const auto ex = parse_triples(
        "Here you go:\n[{\"node_1\": \"Lift  Coefficient\", \"node_2\": \"camber\", \"edge\": \"depends on\"},"
        " {\"node1\": \"a\", \"node2\": \"a\", \"edge\": \"self\"}, {\"node_1\": \"x\"}, 3]",
        "d#0000");
    REQUIRE(ex.triples.size() == 1);
    CHECK(ex.triples[0].node1 == "lift coefficient");
    CHECK(ex.triples[0].chunk_id == "d#0000");
    CHECK(ex.warnings == 3);
    CHECK_THROWS_AS(parse_triples("no json here", "d"), Error);
  }

  TEST_CASE("extraction retries unparseable replies") {
    const ScriptedChatBackend always_bad("bad", {}, std::string("sorry"));
    const DocumentChunk chunk{"d#0000", "d", 0, 4, "text"};
    try {
      extract_triples(chunk, always_bad, resource_text("systems_engineer_kg"));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == errc::unparseable);
      CHECK(std::string(e.what()).find("after 2 retries") != std::string::npos);
    }
    const ScriptedChatBackend good("good", {{{"text"}, {}, ScriptedChatBackend::Scope::last_user,
                                             R"([{"node_1":"a","node_2":"b","edge":"c"}])", false}});
    const auto ex = extract_triples(chunk, good, resource_text("systems_engineer_kg"));
    CHECK(ex.triples.size() == 1);
    CHECK(ex.attempts == 1);
  }

  TEST_CASE("consolidation equals the brute-force oracle") {
    for (const auto& fx : testing_support::kg_fixtures()) {
      CAPTURE(fx.name);
      const auto emb = fx.embedder();
      const auto kg = consolidate(fx.library_triples(), emb, fx.threshold);
      CHECK(matches_oracle(kg, oracle::brute_force_merge(fx.triples, fx.vectors, fx.threshold)));
      for (const auto& e : kg.edges()) CHECK(e.weight == e.provenance.size());
      const auto deg = kg.degrees();
      for (const auto& n : kg.nodes()) CHECK(deg.at(n) > 0);
    }
  }

  TEST_CASE("merging follows chains and names groups by frequency") {
    const auto fixtures = testing_support::kg_fixtures();
    const auto& chain = fixtures[1];
    const auto kg = consolidate(chain.library_triples(), chain.embedder(), 0.9);
    CHECK(kg.nodes() == std::set<std::string>{"drag", "section depth", "stall"});
    const auto& pair = fixtures[0];
    const auto kg2 = consolidate(pair.library_triples(), pair.embedder(), 0.9);
    CHECK(kg2.nodes().count("lift coefficient") == 1);
    CHECK(kg2.nodes().count("cl") == 0);
  }

  TEST_CASE("graph invariants are enforced") {
    CHECK_THROWS_AS(KnowledgeGraph({"a"}, {{"a", "b", "x", 1, {"c"}}}), Error);
    CHECK_THROWS_AS(KnowledgeGraph({"a", "b"}, {{"a", "b", "x", 2, {"c"}}}), Error);
    CHECK_THROWS_AS(KnowledgeGraph({"a"}, {{"a", "a", "x", 1, {"c"}}}), Error);
    CHECK_THROWS_AS(KnowledgeGraph({"a", "b"}, {{"a", "b", "x", 1, {"c"}}, {"b", "a", "x", 1, {"d"}}}), Error);
    const KnowledgeGraph flipped({"a", "b"}, {{"b", "a", "x", 2, {"d", "c"}}});
    CHECK(flipped.edges()[0].node1 == "a");
    CHECK(flipped.edges()[0].provenance == std::vector<std::string>{"c", "d"});
  }

  TEST_CASE("CSV round trip is lossless") {
    for (const auto& fx : testing_support::kg_fixtures()) {
      const auto kg = consolidate(fx.library_triples(), fx.embedder(), fx.threshold);
      const auto csv = export_csv(kg);
      const auto back = import_csv(csv);
      CHECK(back == kg);
      CHECK(export_csv(back) == csv);
    }
    const auto fixture_kg = import_csv(read_file(testing_support::data_dir() / "kg" / "systems_engineer_kg.csv"));
    CHECK(fixture_kg.edges().size() == 29);
  }

  TEST_CASE("CSV import reports schema errors with row numbers") {
    const std::string header = "node_1,node_2,edge,weight,chunk_ids\n";
    try {
      import_csv(header + "a,b,x,1,c\n,b,x,1,c\n");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == errc::schema);
      CHECK(std::string(e.what()).find("row 2") != std::string::npos);
      CHECK(std::string(e.what()).find("missing node_1") != std::string::npos);
    }
    CHECK_THROWS_AS(import_csv(header + "a,b,x,2,c\n"), Error);
    CHECK_THROWS_AS(import_csv("a,b\n"), Error);
    CHECK_THROWS_AS(import_csv(header + "a,b,x,1,c\nb,a,x,1,d\n"), Error);
  }

  TEST_CASE("degree filter keeps nodes of degree ten or more") {
    for (const auto& triples : testing_support::hub_fixtures()) {
      const HashingEmbedder emb;
      const auto kg = consolidate(triples, emb, 1.5);
      const auto deg = kg.degrees();
      const auto filtered = filter_by_degree(kg, 10);
      for (const auto& n : filtered.nodes()) CHECK(deg.at(n) >= 10);
      std::size_t expected_edges = 0;
      for (const auto& e : kg.edges()) {
        if (deg.at(e.node1) >= 10 && deg.at(e.node2) >= 10) ++expected_edges;
      }
      CHECK(filtered.edges().size() == expected_edges);
      CHECK(filter_by_degree(kg, 0) == kg);
      CHECK(filter_by_degree(kg, 1) == kg);
    }
  }

  TEST_CASE("a star loses its hub once the leaves are gone") {
    std::vector<Triple> star;
    for (int i = 0; i < 5; ++i) star.push_back({"hub", "leaf " + std::to_string(i), "has", "c#0000"});
    const HashingEmbedder emb;
    const auto kg = consolidate(star, emb, 1.5);
    CHECK(kg.degrees().at("hub") == 5);
    const auto filtered = filter_by_degree(kg, 2);
    CHECK(filtered.nodes().empty());
    CHECK(filtered.edges().empty());
  }

  TEST_CASE("build_kg over the bundled corpus") {
    const auto corpus = load_corpus(testing_support::data_dir() / "corpus");
    REQUIRE(corpus.size() == 3);
    const auto backend =
        ScriptedChatBackend::from_file(testing_support::data_dir() / "scripts" / "ontologist.yaml");
    const HashingEmbedder emb;
    const auto report = build_kg(corpus, resource_text("systems_engineer_kg"), backend, emb);
    CHECK(report.chunks == 3);
    CHECK(report.raw_triples == 25);
    CHECK(report.graph.nodes().count("lift coefficient") == 1);
    CHECK(report.graph.nodes().count("Lift Coefficient") == 0);
    for (const auto& e : report.graph.edges()) CHECK(e.weight == e.provenance.size());
  }
}
