#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace eventcube::cli {

/// Bookkeeping for one command writing into a run directory. `commit()`
/// merges an entry for the command into `<out>/manifest.json` with the
/// configuration hash, seeds, input digests and the digest of every file
/// the command wrote.
class RunRecord {
 public:
  RunRecord(std::string command, std::filesystem::path out_dir, const nlohmann::json& config);

  const std::filesystem::path& out() const noexcept { return out_; }
  std::filesystem::path path(const std::string& relative) const { return out_ / relative; }

  void seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }
  /// A file, or a directory digested file by file in name order.
  void input(const std::string& role, const std::filesystem::path& path);
  /// Registers a file already written under the run directory.
  void output(const std::filesystem::path& path);
  void note(const std::string& key, nlohmann::json value) { notes_[key] = std::move(value); }

  void commit() const;

 private:
  std::string command_;
  std::filesystem::path out_;
  nlohmann::json config_;
  std::map<std::string, std::uint64_t> seeds_;
  nlohmann::json inputs_ = nlohmann::json::object();
  std::vector<std::filesystem::path> outputs_;
  nlohmann::json notes_ = nlohmann::json::object();
};

}  // namespace eventcube::cli
