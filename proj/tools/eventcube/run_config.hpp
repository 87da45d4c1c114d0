#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include <eventcube/analyze.hpp>
#include <eventcube/embed.hpp>
#include <eventcube/sae.hpp>
#include <eventcube/tensorize.hpp>

namespace eventcube::cli {

struct GenSettings {
  std::size_t per_class = 50;
};

struct ClusterSettings {
  std::optional<double> eps;  // suggested from the k-distance curve when unset
  std::size_t min_pts = 5;
  bool standardize = true;  // z-score latent columns before DBSCAN
};

struct HeadSettings {
  HeadConfig model;
  double test_fraction = 0.2;
};

/// Everything a command may need. Defaults follow the reference training
/// protocol; a JSON file and then command-line flags override them.
struct RunConfig {
  std::uint64_t seed = 0;
  std::size_t workers = 0;  // 0 keeps the OpenMP default
  GenSettings gen;
  BinningConfig binning;
  /// Architecture JSON; `input_dims` may be omitted and is then taken from
  /// the binning. Unset means the default stack for the tensor kind.
  std::optional<nlohmann::json> arch;
  sae::TrainConfig train;
  TsneConfig tsne;
  ClusterSettings cluster;
  std::size_t knn_k = 3;
  std::size_t score_k = 5;
  HeadSettings head;

  /// Dense stack for cubes, convolutional stack for maps, sized to the binning.
  sae::ArchSpec resolved_arch() const;
  /// Throws InvalidConfig.
  void validate() const;
};

/// Strict parse: unknown keys and wrong types raise InvalidConfig.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path);

/// Canonical form of the effective configuration, used for the manifest hash.
nlohmann::json config_to_json(const RunConfig& cfg);

}  // namespace eventcube::cli
