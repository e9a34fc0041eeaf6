#include "aerodesign/run_store.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "aerodesign/error.hpp"
#include "aerodesign/util.hpp"

namespace aerodesign {

namespace fs = std::filesystem;

bool valid_run_id(std::string_view id) {
  if (id.empty() || id.size() > 64 || id == "." || id == "..") return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
  });
}

RunStore::RunStore(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

fs::path RunStore::run_dir(const std::string& run_id) const {
  if (!valid_run_id(run_id)) throw Error(errc::config_invalid, "invalid run id '" + run_id + "'");
  return root_ / run_id;
}

bool RunStore::exists(const std::string& run_id) const {
  return valid_run_id(run_id) && fs::exists(run_dir(run_id) / "events.jsonl");
}

void RunStore::create(const std::string& run_id) {
  std::lock_guard lock(mutex_);
  const auto dir = run_dir(run_id);
  if (fs::exists(dir / "events.jsonl")) {
    throw Error(errc::run_exists, "run '" + run_id + "' already exists");
  }
  fs::create_directories(dir / "profiles");
  fs::create_directories(dir / "renders");
  write_file(dir / "events.jsonl", "");
}

void RunStore::append_event(const std::string& run_id, std::string_view line) {
  std::lock_guard lock(mutex_);
  std::ofstream out(run_dir(run_id) / "events.jsonl", std::ios::binary | std::ios::app);
  if (!out) throw Error(errc::io, "cannot append to the event log of '" + run_id + "'");
  out << line << '\n';
  out.flush();
  if (!out) throw Error(errc::io, "write to the event log of '" + run_id + "' failed");
}

std::string RunStore::read_events(const std::string& run_id) const {
  std::lock_guard lock(mutex_);
  const auto path = run_dir(run_id) / "events.jsonl";
  if (!fs::exists(path)) throw Error(errc::run_not_found, "unknown run '" + run_id + "'");
  return read_file(path);
}

void RunStore::write_artifact(const std::string& run_id, const std::string& relative,
                              std::string_view content) {
  const fs::path rel(relative);
  if (rel.is_absolute() || relative.find("..") != std::string::npos) {
    throw Error(errc::io, "artifact path must stay inside the run directory");
  }
  const auto path = run_dir(run_id) / rel;
  fs::create_directories(path.parent_path());
  write_file_atomic(path, content);
}

std::string RunStore::read_artifact(const std::string& run_id, const std::string& relative) const {
  if (relative.find("..") != std::string::npos) throw Error(errc::io, "bad artifact path");
  const auto path = run_dir(run_id) / relative;
  if (!fs::exists(path)) {
    throw Error(errc::run_not_found, "no artifact '" + relative + "' in run '" + run_id + "'");
  }
  return read_file(path);
}

bool RunStore::has_artifact(const std::string& run_id, const std::string& relative) const {
  return relative.find("..") == std::string::npos && fs::exists(run_dir(run_id) / relative);
}

std::vector<std::string> RunStore::list_runs() const {
  std::vector<std::string> out;
  if (!fs::exists(root_)) return out;
  for (const auto& entry : fs::directory_iterator(root_)) {
    const auto name = entry.path().filename().string();
    if (entry.is_directory() && valid_run_id(name) && fs::exists(entry.path() / "events.jsonl")) {
      out.push_back(name);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace aerodesign
