#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eventcube/analyze.hpp"
#include "eventcube/embed.hpp"
#include "eventcube/ingest.hpp"
#include "eventcube/tensorize.hpp"

namespace eventcube {

using Rgb = std::array<std::uint8_t, 3>;

/// Piecewise-linear viridis through nine anchors; t is clamped to [0, 1].
Rgb viridis(double t) noexcept;
/// Ten-colour categorical palette, cycling.
Rgb tab10(std::size_t i) noexcept;

/// Per-point colouring source. Discrete columns use tab10 in order of
/// `categories`; continuous columns use viridis over [min, max]. Points
/// without a value are drawn grey.
struct ColorColumn {
  std::string name;
  bool discrete = false;
  std::vector<std::optional<double>> values;       // continuous
  std::vector<std::optional<std::size_t>> codes;   // discrete, index into categories
  std::vector<std::string> categories;
};

/// `variability_index`, `hardness_ratio` or `class_tag`. Throws InvalidConfig
/// for an unknown name or a column with no values.
ColorColumn label_column(const Embedding2D& embedding, std::string_view name);

/// Cluster ids as categories; noise is shown as "noise".
ColorColumn cluster_column(const ClusterLabels& clusters);

/// One `<circle>` per point plus a legend. Throws EmptyEmbedding, DimMismatch.
std::string scatter_svg(const Embedding2D& embedding, const ColorColumn* color = nullptr);
void render_scatter_svg(const Embedding2D& embedding, const ColorColumn* color, const std::filesystem::path& path);

/// Event counts in consecutive bins of `bin_seconds` starting at the first
/// event; ceil(T / bin_seconds) bins (at least one). The last event lands in
/// the last bin. Throws InvalidConfig for a non-positive width.
std::vector<std::size_t> light_curve_counts(const EventSeries& series, double bin_seconds);

/// Light-curve panel, plus a heatmap of `map` (tau across, modality up) when given.
std::string series_svg(const EventSeries& series, double bin_seconds, const MapTensor* map = nullptr);
void render_series_svg(const EventSeries& series, double bin_seconds, const MapTensor* map,
                       const std::filesystem::path& path);

/// One heatmap tile per gap bin of a cube. Throws DimMismatch.
std::string cube_mosaic_svg(const CubeTensor& cube);

/// Sorted k-distance curve for choosing a DBSCAN radius, with the suggestion marked.
std::string k_distance_svg(std::span<const double> sorted_distances, double suggested_eps);

}  // namespace eventcube
