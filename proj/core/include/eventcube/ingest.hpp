#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace eventcube {

/// Externally supplied per-series labels. All fields optional.
struct SeriesLabels {
  std::optional<double> variability_index;  // [0, 10]
  std::optional<double> hardness_ratio;     // [-1, 1]
  std::optional<std::string> class_tag;

  bool empty() const noexcept {
    return !variability_index && !hardness_ratio && !class_tag;
  }
  bool operator==(const SeriesLabels&) const = default;
};

/// One irregular event sequence: timestamps in seconds and a strictly
/// positive modality value (photon energy in eV for X-ray data) per event.
struct EventSeries {
  std::string series_id;
  std::vector<double> time;
  std::vector<double> energy;
  SeriesLabels labels;

  std::size_t size() const noexcept { return time.size(); }
  /// t_N - t_1; only meaningful once the series is sorted.
  double duration() const noexcept { return time.empty() ? 0.0 : time.back() - time.front(); }
};

struct ValidationPolicy {
  std::size_t min_events = 2;
  bool require_positive_modality = true;  // set when the log10 transform is configured
};

/// Parses an event CSV with header `time,energy`. Rows are kept in file order.
/// The series id is taken from the file stem.
EventSeries parse_event_csv(const std::filesystem::path& path);

/// Writes `time,energy` rows using the shortest representation that parses
/// back to the same double.
void write_event_csv(const EventSeries& series, const std::filesystem::path& path);

/// Stable-sorts by timestamp (energies carried along) and checks the policy.
/// Duplicate timestamps are kept.
EventSeries validate_series(EventSeries raw, const ValidationPolicy& policy = {});

struct CatalogEntry {
  std::string series_id;
  std::filesystem::path file;  // absolute after load_catalog
  SeriesLabels labels;
};

struct Catalog {
  std::vector<CatalogEntry> entries;
  std::filesystem::path root;

  std::size_t size() const noexcept { return entries.size(); }
  bool empty() const noexcept { return entries.empty(); }
};

/// Reads a JSON-lines catalog; relative `file` entries resolve against the
/// catalog's directory.
Catalog load_catalog(const std::filesystem::path& path);

/// Writes a JSON-lines catalog. Files under the catalog's directory are
/// stored relative to it.
void write_catalog(const Catalog& catalog, const std::filesystem::path& path);

/// Convenience: parse, attach catalog labels and id, validate.
EventSeries load_series(const CatalogEntry& entry, const ValidationPolicy& policy = {});

struct CatalogSplit {
  Catalog train;
  Catalog val;
  Catalog test;
};

struct SplitSizes {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

/// Sizes of the two-stage split: 90/10 into (train+val)/test, then 80/20 into
/// train/val. The smaller side of each stage gets ceil(fraction * n).
SplitSizes split_sizes(std::size_t n);

/// Seeded shuffle followed by the two-stage split. Requires at least 10 entries.
CatalogSplit split_catalog(const Catalog& catalog, std::uint64_t seed);

/// Same split applied to plain indices [0, n).
struct IndexSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};
IndexSplit split_indices(std::size_t n, std::uint64_t seed);

}  // namespace eventcube
