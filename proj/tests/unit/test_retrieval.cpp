#include <doctest.h>

#include <random>

#include "aerodesign/chat.hpp"
#include "aerodesign/embedding.hpp"
#include "aerodesign/error.hpp"
#include "aerodesign/retrieval.hpp"
#include "aerodesign/util.hpp"
#include "../support/helpers.hpp"
#include "../support/oracles.hpp"

using namespace aerodesign;

namespace {

VectorStore random_store(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  std::normal_distribution<float> g;
  std::vector<EmbeddedChunk> entries;
  for (std::size_t i = 0; i < n; ++i) {
    Embedding v(dim);
    for (auto& x : v) x = g(rng);
    if (i % 50 == 7) v = entries[i - 1].vector;  // exact ties
    KgChunk c{"c" + std::to_string(rng() % 100000) + "-" + std::to_string(i), "src", i + 1, i + 1, "t"};
    entries.push_back({std::move(c), std::move(v)});
  }
  return VectorStore(dim, "test", std::move(entries));
}

}  // namespace

TEST_SUITE("retrieval") {
  TEST_CASE("cosine similarity") {
    const std::vector<float> a{1, 0}, b{0, 2}, z{0, 0};
    CHECK(cosine_similarity(a, a) == doctest::Approx(1.0));
    CHECK(cosine_similarity(a, b) == 0.0);
    CHECK(cosine_similarity(a, z) == 0.0);
    CHECK_THROWS_AS(cosine_similarity(a, std::vector<float>{1, 2, 3}), Error);
  }

  TEST_CASE("hashing embedder") {
    const HashingEmbedder e(64);
    const std::vector<std::string> texts{"lift coefficient", "lift coefficient", "trailing edge"};
    const auto v = e.embed(texts);
    CHECK(v[0] == v[1]);
    CHECK(v[0].size() == 64);
    CHECK(cosine_similarity(v[0], v[2]) < 0.9);
    CHECK(e.id() == "hashing-64");
  }

  TEST_CASE("scripted embedder falls back to hashing") {
    const auto e = ScriptedEmbedder::from_yaml("id: s\ndimension: 3\nvectors:\n  a: [1, 0, 0]\n");
    const std::vector<std::string> texts{"a", "b"};
    const auto v = e.embed(texts);
    CHECK(v[0] == Embedding{1, 0, 0});
    CHECK(v[1].size() == 3);
  }

  TEST_CASE("KG CSV chunking repeats the header") {
    std::string csv = "node_1,node_2,edge,weight,chunk_ids\n";
    for (int i = 0; i < 65; ++i) csv += "a" + std::to_string(i) + ",b,x,1,c\n";
    const auto chunks = chunk_kg_csv(csv, "kg.csv", 30);
    REQUIRE(chunks.size() == 3);
    CHECK(chunks[0].chunk_id == "kg.csv:000001-000030");
    CHECK(chunks[2].first_row == 61);
    CHECK(chunks[2].last_row == 65);
    for (const auto& c : chunks) CHECK(c.text.rfind("node_1,node_2", 0) == 0);
    CHECK_THROWS_AS(chunk_kg_csv(csv, "kg.csv", 0), Error);
  }

  TEST_CASE("top-k equals exhaustive ranking") {
    std::mt19937_64 rng(8);
    const auto store = random_store(rng, 300, 12);
    std::vector<std::vector<float>> vecs;
    std::vector<std::string> ids;
    for (const auto& e : store.entries()) {
      vecs.push_back(e.vector);
      ids.push_back(e.chunk.chunk_id);
    }
    std::normal_distribution<float> g;
    for (int q = 0; q < 30; ++q) {
      std::vector<float> query(12);
      for (auto& x : query) x = g(rng);
      if (q % 5 == 0) query = vecs[7];
      const auto hits = top_k(store, query, 10);
      const auto expected = oracle::exhaustive_top_k(vecs, ids, query, 10);
      REQUIRE(hits.size() == expected.size());
      for (std::size_t i = 0; i < hits.size(); ++i) CHECK(hits[i].entry->chunk.chunk_id == ids[expected[i]]);
    }
    CHECK(top_k(store, vecs[0], 1000).size() == 300);
    CHECK_THROWS_AS(top_k(store, vecs[0], 0), Error);
    CHECK_THROWS_AS(top_k(store, std::vector<float>{1, 2}, 3), Error);
  }

  TEST_CASE("store serialization round trip") {
    std::mt19937_64 rng(3);
    const auto store = random_store(rng, 20, 5);
    CHECK(VectorStore::deserialize(store.serialize()) == store);
    testing_support::TempDir dir;
    store.save(dir.path() / "s.jsonl");
    CHECK(VectorStore::load(dir.path() / "s.jsonl") == store);
    CHECK_THROWS_AS(VectorStore::deserialize("{\"format_version\": 9}\n"), Error);
    CHECK_THROWS_AS(VectorStore(3, "x", {{{"a", "s", 1, 1, "t"}, {1, 2}}}), Error);
  }

  TEST_CASE("index and retrieve with prompt augmentation") {
    const auto csv = read_file(testing_support::data_dir() / "kg" / "systems_engineer_kg.csv");
    const HashingEmbedder emb;
    const auto store = index(chunk_kg_csv(csv, "se.csv", 10), emb);
    CHECK(store.size() == 3);
    const auto r = retrieve("lift coefficient floor", store, emb, nullptr, 2);
    REQUIRE(r.hits.size() == 2);
    CHECK(r.chunk_ids.size() == 2);
    const auto prompt = augment_prompt("Question?", r.hits);
    CHECK(prompt.find("[" + r.chunk_ids[0] + "]") != std::string::npos);
    CHECK(prompt.substr(prompt.size() - 9) == "Question?");
    CHECK(augment_prompt("Q", {}) == "Q");
    const auto empty = index({}, emb);
    CHECK(empty.dimension() == 0);
    CHECK(retrieve("x", empty, emb, nullptr, 3).hits.empty());
  }

  TEST_CASE("query rewrite falls back on backend failure") {
    const ScriptedChatBackend failing("f", {{{}, {}, ScriptedChatBackend::Scope::all, "", true}});
    const auto rw = rewrite_query("original", failing);
    CHECK(rw.fell_back);
    CHECK(rw.query == "original");
    CHECK_FALSE(rw.warning.empty());
    const ScriptedChatBackend ok("ok", {}, std::string("  short query \n"));
    CHECK(rewrite_query("original", ok).query == "short query");
  }
}
