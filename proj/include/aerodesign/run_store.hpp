#pragma once

#include <filesystem>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace aerodesign {

/// One directory per run under a root:
///
///     <root>/<run_id>/events.jsonl      one checksummed JSON event per line
///     <root>/<run_id>/candidates.csv
///     <root>/<run_id>/profiles/<id>.csv
///     <root>/<run_id>/renders/<id>.svg
///     <root>/<run_id>/report.json
class RunStore {
 public:
  explicit RunStore(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path run_dir(const std::string& run_id) const;

  bool exists(const std::string& run_id) const;
  // Throws Error(run.exists) when the run already has an event log.
  void create(const std::string& run_id);
  void append_event(const std::string& run_id, std::string_view line);
  // Throws Error(run.not_found).
  std::string read_events(const std::string& run_id) const;
  void write_artifact(const std::string& run_id, const std::string& relative,
                      std::string_view content);
  std::string read_artifact(const std::string& run_id, const std::string& relative) const;
  bool has_artifact(const std::string& run_id, const std::string& relative) const;
  std::vector<std::string> list_runs() const;

 private:
  std::filesystem::path root_;
  mutable std::mutex mutex_;
};

// Run ids double as directory names: [A-Za-z0-9._-]{1,64}, not "." or "..".
bool valid_run_id(std::string_view id);

}  // namespace aerodesign
