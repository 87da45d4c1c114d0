#include "manifest.hpp"

#include <algorithm>
#include <fstream>

#include <eventcube/digest.hpp>
#include <eventcube/error.hpp>

namespace eventcube::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json digest_directory(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string listing;
  for (const auto& f : files) listing += f.filename().string() + "  " + sha256_file(f) + "\n";
  return {{"path", fs::absolute(dir).lexically_normal().string()}, {"files", files.size()}, {"sha256", sha256_hex(listing)}};
}

}  // namespace

RunRecord::RunRecord(std::string command, fs::path out_dir, const json& config)
    : command_(std::move(command)), out_(std::move(out_dir)), config_(config) {
  std::error_code ec;
  fs::create_directories(out_, ec);
  if (ec) throw Error(Errc::IoFailure, "cannot create run directory " + out_.string() + ": " + ec.message());
}

void RunRecord::input(const std::string& role, const fs::path& path) {
  if (fs::is_directory(path)) {
    inputs_[role] = digest_directory(path);
  } else {
    inputs_[role] = {{"path", fs::absolute(path).lexically_normal().string()}, {"sha256", sha256_file(path)}};
  }
}

void RunRecord::output(const fs::path& path) { outputs_.push_back(path); }

void RunRecord::commit() const {
  const fs::path manifest = out_ / "manifest.json";
  json doc = json::object();
  if (fs::exists(manifest)) {
    std::ifstream in(manifest);
    try {
      doc = json::parse(in);
    } catch (const json::exception&) {
      doc = json::object();
    }
  }
  if (!doc.contains("commands") || !doc["commands"].is_object()) doc["commands"] = json::object();

  auto sorted = outputs_;
  std::sort(sorted.begin(), sorted.end());
  json outs = json::array();
  for (const auto& p : sorted) {
    outs.push_back({{"path", fs::relative(p, out_).generic_string()},
                    {"bytes", fs::file_size(p)},
                    {"sha256", sha256_file(p)}});
  }
  json entry;
  entry["config"] = config_;
  entry["config_sha256"] = sha256_hex(config_.dump());
  entry["seeds"] = seeds_;
  entry["inputs"] = inputs_;
  entry["outputs"] = outs;
  if (!notes_.empty()) entry["notes"] = notes_;
  doc["commands"][command_] = entry;

  std::ofstream out(manifest, std::ios::binary | std::ios::trunc);
  out << doc.dump(2) << "\n";
  if (!out) throw Error(Errc::IoFailure, "cannot write " + manifest.string());
}

}  // namespace eventcube::cli
