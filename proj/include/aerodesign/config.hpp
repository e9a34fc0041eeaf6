#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "aerodesign/chat.hpp"
#include "aerodesign/embedding.hpp"
#include "aerodesign/knowledge.hpp"
#include "aerodesign/retrieval.hpp"
#include "aerodesign/run_store.hpp"
#include "aerodesign/workflow.hpp"

namespace aerodesign {

/// One chat or embedding backend as written in the config file.
///
///     kind: scripted | http | hashing
///     script: scripts/se.yaml        # scripted, relative to the config file
///     base_url: https://host/v1      # http
///     model: name                    # http
///     api_key_env: OPENAI_API_KEY    # http, name of the env var holding the key
///     timeout_s: 60
///     retries: 2
///     vision: false
///     dimension: 256                 # hashing embedder
struct BackendSpec {
  std::string kind = "scripted";
  std::filesystem::path script;
  std::string base_url;
  std::string model;
  std::string api_key_env;
  int timeout_s = 60;
  int retries = 2;
  bool vision = false;
  std::size_t dimension = 256;
};

struct KnowledgeSettings {
  std::filesystem::path systems_engineer_kg;  // KG CSV, empty disables retrieval
  std::filesystem::path design_engineer_kg;
  std::size_t rows_per_chunk = kDefaultRowsPerChunk;
  std::size_t k = kDefaultTopK;
  double merge_threshold = kDefaultMergeThreshold;
  std::size_t chunk_size = kDefaultChunkSize;
  std::size_t min_degree = 10;
};

/// Application configuration, YAML:
///
///     runs_dir: runs
///     threads: 1
///     backends:
///       systems_engineer: {kind: scripted, script: se.yaml}
///       design_engineer:  {kind: scripted, script: de.yaml}
///       ontologist:       {kind: scripted, script: onto.yaml}
///       rewriter:         {...}          # optional query rewriting
///       embedder:         {kind: hashing, dimension: 256}
///     knowledge: {systems_engineer_kg: se.csv, design_engineer_kg: de.csv, k: 5}
///     design_space: {lower: [0.01, 0.05, 0.01], upper: [0.095, 0.9, 0.40]}
///     workflow: {sample_n: 100, sampling: {kind: latin_hypercube, seed: 7}, ...}
///     optimizer: {budget: 1500, seed: 0, ...}
///
/// Environment overrides: AERODESIGN_<ROLE>_BASE_URL, AERODESIGN_<ROLE>_MODEL
/// and AERODESIGN_<ROLE>_API_KEY (ROLE upper-cased, e.g. SYSTEMS_ENGINEER).
/// AERODESIGN_RUNS_DIR overrides runs_dir.
struct AppConfig {
  std::filesystem::path base_dir;
  std::filesystem::path runs_dir = "runs";
  unsigned threads = 1;
  std::map<std::string, BackendSpec> backends;
  KnowledgeSettings knowledge;
  Json run;  // run_config_from_json form of workflow + design_space + optimizer

  RunConfig run_config() const;
};

AppConfig parse_app_config(const std::string& yaml_text, const std::filesystem::path& base_dir);
AppConfig load_app_config(const std::filesystem::path& path);

/// Converts YAML text to JSON: plain scalars become bool, integer, float or
/// null when they parse as such, quoted scalars stay strings.
Json yaml_to_json(const std::string& yaml_text);

std::unique_ptr<ChatBackend> make_chat_backend(const BackendSpec& spec, const std::string& role);
std::unique_ptr<Embedder> make_embedder(const BackendSpec& spec);

/// Everything a process needs to drive runs: backends, knowledge stores and
/// the run store, built from an AppConfig.
class Runtime {
 public:
  explicit Runtime(AppConfig config);

  const AppConfig& config() const noexcept { return config_; }
  RunStore& store() noexcept { return *store_; }
  const Embedder& embedder() const noexcept { return *embedder_; }
  // Throws Error(config.invalid) when the role has no backend.
  const ChatBackend& backend(const std::string& role) const;
  bool has_backend(const std::string& role) const;
  WorkflowDeps deps() const;

 private:
  AppConfig config_;
  std::unique_ptr<RunStore> store_;
  std::unique_ptr<Embedder> embedder_;
  std::map<std::string, std::unique_ptr<ChatBackend>> backends_;
  std::optional<VectorStore> se_store_;
  std::optional<VectorStore> de_store_;
};

}  // namespace aerodesign
