#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "eventcube/ingest.hpp"

namespace eventcube {

struct SteadyShape {};

/// Linear rise from the onset over `rise_time`, then exponential decay.
struct FlareShape {
  double peak_amplitude = 20.0;  // events/s above base at the peak
  double rise_time = 50.0;
  double decay_time = 400.0;
  double onset_fraction = 0.3;
};

/// Rate suppressed by `depth` inside [start, start + width] (fractions of T).
struct DipShape {
  double depth = 0.9;  // (0, 1]
  double start_fraction = 0.4;
  double width_fraction = 0.2;
};

struct PulsatingShape {
  double modulation_fraction = 0.8;  // (0, 1)
  double period = 1000.0;
};

using SourceShape = std::variant<SteadyShape, FlareShape, DipShape, PulsatingShape>;

/// Log-normal modality distribution: log10(E) ~ Normal(log10_mean, log10_sigma).
struct Spectrum {
  double log10_mean = 3.0;
  double log10_sigma = 0.2;
};

enum class SourceKind { Steady, Flare, Dip, Pulsating };

std::string_view source_kind_name(SourceKind kind) noexcept;

struct SourceModel {
  SourceShape shape = SteadyShape{};
  double base_rate = 1.0;   // events/s
  double duration = 10000;  // seconds
  Spectrum spectrum;
  std::uint64_t seed = 0;

  SourceKind kind() const noexcept { return static_cast<SourceKind>(shape.index()); }
};

/// Checks shape and rate invariants; throws InvalidConfig.
void check_model(const SourceModel& model);

/// Instantaneous rate at t in [0, T]. Throws OutOfRange outside.
double rate_at(const SourceModel& model, double t);

/// Supremum of the rate over [0, T].
double max_rate(const SourceModel& model);

/// Inhomogeneous Poisson sample by thinning against max_rate(). Deterministic
/// in model.seed. The class_tag label is the kind name.
EventSeries sample_series(const SourceModel& model);

struct DatasetComponent {
  SourceModel model;  // model.seed is ignored; per-series seeds derive from the master seed
  std::size_t count = 1;
};

/// Seed for series `index` of component `component`.
std::uint64_t derive_seed(std::uint64_t master_seed, std::size_t component, std::size_t index);

/// Samples every component in order; ids are `<kind>_c<component>_<index>`.
/// Besides class_tag, the labels carry a hardness ratio measured from the
/// sampled energies and a variability index from the binned light curve.
std::vector<EventSeries> simulate_dataset(const std::vector<DatasetComponent>& components, std::uint64_t master_seed);

/// simulate_dataset, then writes `<root>/events/<id>.csv` per series and `<root>/catalog.jsonl`.
Catalog generate_dataset(const std::vector<DatasetComponent>& components, const std::filesystem::path& root,
                         std::uint64_t master_seed);

/// Hardness ratio (H - S) / (H + S) with S = [500, 1200) eV, H = [2000, 7000) eV.
double hardness_ratio(const EventSeries& series);

/// Score in [0, 10) from the excess variance of a 24-bin light curve over a
/// constant-rate model. 0 for a perfectly Poisson-consistent curve.
double variability_score(const EventSeries& series);

/// The default four-class set used by the demos and acceptance runs.
std::vector<DatasetComponent> standard_classes(std::size_t per_class);

}  // namespace eventcube
