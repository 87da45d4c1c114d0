#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "eventcube/ingest.hpp"

namespace eventcube {

enum class ModalityTransform { Log10, Identity };

/// On-disk codes are part of the tensor file format.
enum class CountScaling : std::uint8_t { Raw = 0, UnitSum = 1, Log1p = 2 };

/// Each series maps its own [min, max] transformed modality onto [0, 1].
struct PerSeriesBounds {};
/// Fixed bounds in transformed units; values outside are clamped to edge bins.
struct GlobalBounds {
  double lo = 0.0;
  double hi = 1.0;
};
/// Placeholder for "global bounds taken from the dataset range"; must be
/// resolved with resolve_bounds() before normalizing.
struct DatasetBounds {};

using ModalityBounds = std::variant<DatasetBounds, PerSeriesBounds, GlobalBounds>;

struct BinningConfig {
  std::uint32_t n_tau = 24;
  std::uint32_t n_eps = 16;
  std::uint32_t n_dtau = 16;  // 0 selects map mode (2D output)
  ModalityTransform transform = ModalityTransform::Log10;
  ModalityBounds bounds = DatasetBounds{};
  CountScaling scaling = CountScaling::UnitSum;
  bool strict = true;  // N < 2 is an error rather than a single-point tensor

  bool is_map() const noexcept { return n_dtau == 0; }
  /// Throws InvalidConfig.
  void validate() const;
};

std::string_view transform_name(ModalityTransform t) noexcept;
std::string_view scaling_name(CountScaling s) noexcept;
ModalityTransform parse_transform(std::string_view name);
CountScaling parse_scaling(std::string_view name);

double transform_modality(double value, ModalityTransform transform);

/// Range of the transformed modality over a dataset. A degenerate range is
/// widened by 0.5 on each side.
GlobalBounds compute_global_bounds(std::span<const EventSeries> dataset, ModalityTransform transform);

/// Replaces DatasetBounds with the dataset's global range.
BinningConfig resolve_bounds(BinningConfig cfg, std::span<const EventSeries> dataset);

/// Per-event normalized coordinates. `eps` holds transformed values; the
/// bin coordinate is (eps - eps_min) / (eps_max - eps_min).
struct NormalizedSeries {
  std::string series_id;
  std::vector<double> tau;
  std::vector<double> eps;
  std::vector<double> dtau;
  double eps_min = 0.0;
  double eps_max = 0.0;
  bool clamp_eps = false;  // true under global bounds

  std::size_t size() const noexcept { return tau.size(); }
  /// Modality coordinate of event k in [0, 1].
  double eps_coord(std::size_t k) const noexcept;
};

/// Time, modality and gap normalization. Event k >= 2 takes the gap that
/// precedes it; event 1 takes the first gap. Degenerate denominators map
/// the affected coordinates to 0.
NormalizedSeries normalize_series(const EventSeries& series, const BinningConfig& cfg);

/// Row-major, tau slowest, dtau fastest.
struct CubeTensor {
  std::array<std::uint32_t, 3> dims{};
  CountScaling scaling = CountScaling::Raw;
  std::vector<double> values;
  std::string series_id;

  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return (i * dims[1] + j) * dims[2] + k;
  }
  double at(std::size_t i, std::size_t j, std::size_t k) const { return values.at(index(i, j, k)); }
  bool operator==(const CubeTensor&) const = default;
};

struct MapTensor {
  std::array<std::uint32_t, 2> dims{};
  CountScaling scaling = CountScaling::Raw;
  std::vector<double> values;
  std::string series_id;

  std::size_t index(std::size_t i, std::size_t j) const noexcept { return i * dims[1] + j; }
  double at(std::size_t i, std::size_t j) const { return values.at(index(i, j)); }
  bool operator==(const MapTensor&) const = default;
};

using Tensor = std::variant<CubeTensor, MapTensor>;

/// min(floor(x * n), n - 1) with x clamped to [0, 1].
std::uint32_t bin_index(double coord, std::uint32_t n) noexcept;

CubeTensor bin_cube(const NormalizedSeries& ns, const BinningConfig& cfg);
MapTensor bin_map(const NormalizedSeries& ns, const BinningConfig& cfg);

/// normalize_series followed by bin_map or bin_cube depending on cfg.n_dtau.
Tensor tensorize(const EventSeries& series, const BinningConfig& cfg);

std::span<const double> tensor_values(const Tensor& t) noexcept;
std::vector<std::uint32_t> tensor_dims(const Tensor& t);
const std::string& tensor_series_id(const Tensor& t) noexcept;
CountScaling tensor_scaling(const Tensor& t) noexcept;
/// ".etdt" for cubes, ".etmp" for maps.
std::string_view tensor_extension(const Tensor& t) noexcept;

/// Little-endian tensor file: 4-byte magic (ETDT cube / ETMP map), u16
/// version, u8 scaling code, u32 dims, u32 reserved, float32 payload, u16
/// id length and UTF-8 id. Values are stored as float32.
void write_tensor(const Tensor& t, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_tensor(const Tensor& t);

Tensor read_tensor(const std::filesystem::path& path);
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

inline constexpr std::uint16_t kTensorFormatVersion = 1;

}  // namespace eventcube
