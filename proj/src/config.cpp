#include "aerodesign/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cstdlib>

#include "aerodesign/error.hpp"
#include "aerodesign/util.hpp"

namespace aerodesign {

namespace {

Json scalar_to_json(const YAML::Node& node) {
  const std::string& text = node.Scalar();
  if (node.Tag() == "!") return text;  // quoted
  if (text == "~" || text == "null" || text == "Null" || text == "NULL") return nullptr;
  const std::string lower = to_lower(text);
  if (lower == "true") return true;
  if (lower == "false") return false;
  if (!text.empty()) {
    char* end = nullptr;
    errno = 0;
    const long long i = std::strtoll(text.c_str(), &end, 10);
    if (errno == 0 && end && *end == '\0') return i;
    errno = 0;
    const double d = std::strtod(text.c_str(), &end);
    if (errno == 0 && end && *end == '\0') return d;
  }
  return text;
}

Json node_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined: return nullptr;
    case YAML::NodeType::Scalar: return scalar_to_json(node);
    case YAML::NodeType::Sequence: {
      Json out = Json::array();
      for (const auto& item : node) out.push_back(node_to_json(item));
      return out;
    }
    case YAML::NodeType::Map: {
      Json out = Json::object();
      for (const auto& kv : node) out[kv.first.as<std::string>()] = node_to_json(kv.second);
      return out;
    }
  }
  return nullptr;
}

[[noreturn]] void invalid(const std::string& message) { throw Error(errc::config_invalid, message); }

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string env_or(const std::string& name, const std::string& fallback) {
  const char* v = std::getenv(name.c_str());
  return v && *v ? std::string(v) : fallback;
}

std::string env_prefix(const std::string& role) {
  std::string out = "AERODESIGN_";
  for (char c : role) out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out + "_";
}

BackendSpec parse_backend(const std::string& role, const Json& j, const std::filesystem::path& base) {
  if (!j.is_object()) invalid("backends." + role + " must be a mapping");
  BackendSpec spec;
  for (const auto& [key, v] : j.items()) {
    if (key == "kind") spec.kind = v.get<std::string>();
    else if (key == "script") spec.script = resolve(base, v.get<std::string>());
    else if (key == "base_url") spec.base_url = v.get<std::string>();
    else if (key == "model") spec.model = v.get<std::string>();
    else if (key == "api_key_env") spec.api_key_env = v.get<std::string>();
    else if (key == "timeout_s") spec.timeout_s = v.get<int>();
    else if (key == "retries") spec.retries = v.get<int>();
    else if (key == "vision") spec.vision = v.get<bool>();
    else if (key == "dimension") spec.dimension = v.get<std::size_t>();
    else invalid("unknown key backends." + role + "." + key);
  }
  const std::string prefix = env_prefix(role);
  spec.base_url = env_or(prefix + "BASE_URL", spec.base_url);
  spec.model = env_or(prefix + "MODEL", spec.model);
  if (spec.kind != "scripted" && spec.kind != "http" && spec.kind != "hashing") {
    invalid("backends." + role + ".kind must be scripted, http or hashing");
  }
  if (spec.kind == "scripted" && spec.script.empty()) invalid("backends." + role + " needs a script");
  if (spec.kind == "http" && (spec.base_url.empty() || spec.model.empty())) {
    invalid("backends." + role + " needs base_url and model");
  }
  if (spec.timeout_s < 1 || spec.retries < 0) invalid("backends." + role + " timeout/retries out of range");
  return spec;
}

HttpBackendConfig http_config(const BackendSpec& spec, const std::string& role) {
  HttpBackendConfig c;
  c.base_url = spec.base_url;
  c.model = spec.model;
  c.api_key = std::getenv((env_prefix(role) + "API_KEY").c_str())
                  ? std::getenv((env_prefix(role) + "API_KEY").c_str())
                  : (spec.api_key_env.empty() ? "" : env_or(spec.api_key_env, ""));
  c.timeout = std::chrono::seconds(spec.timeout_s);
  c.max_retries = spec.retries;
  c.vision = spec.vision;
  return c;
}

}  // namespace

Json yaml_to_json(const std::string& yaml_text) {
  try {
    return node_to_json(YAML::Load(yaml_text));
  } catch (const YAML::Exception& e) {
    invalid(std::string("YAML: ") + e.what());
  }
}

RunConfig AppConfig::run_config() const { return run_config_from_json(run); }

AppConfig parse_app_config(const std::string& yaml_text, const std::filesystem::path& base_dir) {
  const Json root = yaml_to_json(yaml_text);
  if (!root.is_object()) invalid("config must be a YAML mapping");
  AppConfig cfg;
  cfg.base_dir = base_dir;
  cfg.run = Json::object();
  try {
    for (const auto& [key, v] : root.items()) {
      if (key == "runs_dir") cfg.runs_dir = resolve(base_dir, v.get<std::string>());
      else if (key == "threads") cfg.threads = v.get<unsigned>();
      else if (key == "backends") {
        for (const auto& [role, spec] : v.items()) {
          if (role != "systems_engineer" && role != "design_engineer" && role != "ontologist" &&
              role != "rewriter" && role != "embedder") {
            invalid("unknown backend role '" + role + "'");
          }
          cfg.backends[role] = parse_backend(role, spec, base_dir);
        }
      } else if (key == "knowledge") {
        for (const auto& [k, kv] : v.items()) {
          auto& ks = cfg.knowledge;
          if (k == "systems_engineer_kg") ks.systems_engineer_kg = resolve(base_dir, kv.get<std::string>());
          else if (k == "design_engineer_kg") ks.design_engineer_kg = resolve(base_dir, kv.get<std::string>());
          else if (k == "rows_per_chunk") ks.rows_per_chunk = kv.get<std::size_t>();
          else if (k == "k") ks.k = kv.get<std::size_t>();
          else if (k == "merge_threshold") ks.merge_threshold = kv.get<double>();
          else if (k == "chunk_size") ks.chunk_size = kv.get<std::size_t>();
          else if (k == "min_degree") ks.min_degree = kv.get<std::size_t>();
          else invalid("unknown key knowledge." + k);
        }
      } else if (key == "workflow") {
        if (!v.is_object()) invalid("workflow must be a mapping");
        for (const auto& [k, kv] : v.items()) cfg.run[k] = kv;
      } else if (key == "design_space" || key == "optimizer") {
        cfg.run[key] = v;
      } else {
        invalid("unknown top-level key '" + key + "'");
      }
    }
  } catch (const Json::exception& e) {
    invalid(std::string("malformed config: ") + e.what());
  }
  if (cfg.runs_dir.is_relative()) cfg.runs_dir = base_dir / cfg.runs_dir;
  cfg.runs_dir = env_or("AERODESIGN_RUNS_DIR", cfg.runs_dir.string());
  if (cfg.knowledge.rows_per_chunk < 1 || cfg.knowledge.k < 1) invalid("knowledge.rows_per_chunk and k must be positive");
  cfg.run_config().validate();  // reject a bad run section at load time
  return cfg;
}

AppConfig load_app_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    invalid("cannot read config " + path.string() + ": " + e.what());
  }
  return parse_app_config(text, std::filesystem::absolute(path).parent_path());
}

std::unique_ptr<ChatBackend> make_chat_backend(const BackendSpec& spec, const std::string& role) {
  if (spec.kind == "scripted") {
    return std::make_unique<ScriptedChatBackend>(ScriptedChatBackend::from_file(spec.script));
  }
  if (spec.kind == "http") return std::make_unique<HttpChatBackend>(http_config(spec, role));
  invalid("backend kind '" + spec.kind + "' cannot serve the " + role + " chat role");
}

std::unique_ptr<Embedder> make_embedder(const BackendSpec& spec) {
  if (spec.kind == "hashing") return std::make_unique<HashingEmbedder>(spec.dimension);
  if (spec.kind == "scripted") {
    return std::make_unique<ScriptedEmbedder>(ScriptedEmbedder::from_file(spec.script));
  }
  return std::make_unique<HttpEmbedder>(http_config(spec, "embedder"));
}

Runtime::Runtime(AppConfig config) : config_(std::move(config)) {
  store_ = std::make_unique<RunStore>(config_.runs_dir);
  const auto emb = config_.backends.find("embedder");
  embedder_ = emb == config_.backends.end() ? std::make_unique<HashingEmbedder>()
                                            : make_embedder(emb->second);
  for (const auto& [role, spec] : config_.backends) {
    if (role != "embedder") backends_[role] = make_chat_backend(spec, role);
  }
  auto load_kg = [&](const std::filesystem::path& path) -> std::optional<VectorStore> {
    if (path.empty()) return std::nullopt;
    const auto chunks =
        chunk_kg_csv(read_file(path), path.filename().string(), config_.knowledge.rows_per_chunk);
    return index(chunks, *embedder_);
  };
  se_store_ = load_kg(config_.knowledge.systems_engineer_kg);
  de_store_ = load_kg(config_.knowledge.design_engineer_kg);
}

bool Runtime::has_backend(const std::string& role) const { return backends_.count(role) > 0; }

const ChatBackend& Runtime::backend(const std::string& role) const {
  const auto it = backends_.find(role);
  if (it == backends_.end()) invalid("no backend configured for role '" + role + "'");
  return *it->second;
}

WorkflowDeps Runtime::deps() const {
  WorkflowDeps d;
  const ChatBackend* rewriter = has_backend("rewriter") ? &backend("rewriter") : nullptr;
  auto ctx = [&](const std::string& role, const std::optional<VectorStore>& kg) {
    AgentContext c;
    c.backend = &backend(role);
    c.store = kg ? &*kg : nullptr;
    c.embedder = embedder_.get();
    c.rewriter = rewriter;
    c.k = config_.knowledge.k;
    return c;
  };
  d.systems_engineer = ctx("systems_engineer", se_store_);
  d.design_engineer = ctx("design_engineer", de_store_);
  d.store = store_.get();
  d.threads = config_.threads;
  return d;
}

}  // namespace aerodesign
