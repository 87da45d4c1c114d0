#include "eventcube/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "eventcube/error.hpp"

namespace eventcube {

namespace fs = std::filesystem;

std::string_view source_kind_name(SourceKind kind) noexcept {
  switch (kind) {
    case SourceKind::Steady: return "steady";
    case SourceKind::Flare: return "flare";
    case SourceKind::Dip: return "dip";
    case SourceKind::Pulsating: return "pulsating";
  }
  return "unknown";
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

void check_model(const SourceModel& model) {
  if (!(model.base_rate >= 0.0) || !std::isfinite(model.base_rate)) {
    throw Error(Errc::InvalidConfig, "base_rate must be finite and non-negative");
  }
  if (!(model.duration > 0.0) || !std::isfinite(model.duration)) {
    throw Error(Errc::InvalidConfig, "duration must be positive");
  }
  if (!(model.spectrum.log10_sigma >= 0.0)) {
    throw Error(Errc::InvalidConfig, "log10_sigma must be non-negative");
  }
  std::visit(overloaded{
                 [](const SteadyShape&) {},
                 [](const FlareShape& f) {
                   if (!(f.peak_amplitude >= 0.0) || !(f.rise_time > 0.0) || !(f.decay_time > 0.0) ||
                       f.onset_fraction < 0.0 || f.onset_fraction > 1.0) {
                     throw Error(Errc::InvalidConfig, "bad flare shape");
                   }
                 },
                 [](const DipShape& d) {
                   if (!(d.depth > 0.0 && d.depth <= 1.0) || d.start_fraction < 0.0 ||
                       d.width_fraction < 0.0 || d.start_fraction + d.width_fraction > 1.0) {
                     throw Error(Errc::InvalidConfig, "bad dip shape");
                   }
                 },
                 [](const PulsatingShape& p) {
                   if (!(p.modulation_fraction > 0.0 && p.modulation_fraction < 1.0) || !(p.period > 0.0)) {
                     throw Error(Errc::InvalidConfig, "bad pulsation shape");
                   }
                 },
             },
             model.shape);
}

double rate_at(const SourceModel& model, double t) {
  if (!(t >= 0.0 && t <= model.duration)) {
    throw Error(Errc::OutOfRange, "t=" + std::to_string(t) + " outside [0, T]");
  }
  const double T = model.duration;
  const double base = model.base_rate;
  return std::visit(
      overloaded{
          [&](const SteadyShape&) { return base; },
          [&](const FlareShape& f) {
            const double onset = f.onset_fraction * T;
            const double peak = onset + f.rise_time;
            if (t < onset) return base;
            if (t < peak) return base + f.peak_amplitude * (t - onset) / f.rise_time;
            return base + f.peak_amplitude * std::exp(-(t - peak) / f.decay_time);
          },
          [&](const DipShape& d) {
            const double start = d.start_fraction * T;
            const double stop = start + d.width_fraction * T;
            return (t >= start && t <= stop) ? base * (1.0 - d.depth) : base;
          },
          [&](const PulsatingShape& p) {
            return base * (1.0 + p.modulation_fraction * std::sin(2.0 * std::numbers::pi * t / p.period));
          },
      },
      model.shape);
}

double max_rate(const SourceModel& model) {
  return std::visit(overloaded{
                        [&](const SteadyShape&) { return model.base_rate; },
                        [&](const FlareShape& f) { return model.base_rate + f.peak_amplitude; },
                        [&](const DipShape&) { return model.base_rate; },
                        [&](const PulsatingShape& p) { return model.base_rate * (1.0 + p.modulation_fraction); },
                    },
                    model.shape);
}

EventSeries sample_series(const SourceModel& model) {
  check_model(model);
  const double lambda_max = max_rate(model);
  if (!(lambda_max > 0.0)) throw Error(Errc::DegenerateModel, "maximum rate is zero");

  std::mt19937_64 rng(model.seed);
  std::exponential_distribution<double> gap(lambda_max);
  std::uniform_real_distribution<double> accept(0.0, 1.0);
  std::normal_distribution<double> log_energy(model.spectrum.log10_mean, model.spectrum.log10_sigma);

  EventSeries series;
  series.labels.class_tag = std::string(source_kind_name(model.kind()));
  double t = 0.0;
  while (true) {
    t += gap(rng);
    if (t > model.duration) break;
    // Draw both variates for every candidate so the stream layout does not
    // depend on acceptance.
    const double u = accept(rng);
    const double le = log_energy(rng);
    if (u * lambda_max <= rate_at(model, t)) {
      series.time.push_back(t);
      series.energy.push_back(std::pow(10.0, le));
    }
  }
  return series;
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::size_t component, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(component), static_cast<std::uint32_t>(index)};
  std::uint32_t words[2];
  seq.generate(std::begin(words), std::end(words));
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

double hardness_ratio(const EventSeries& series) {
  double soft = 0.0;
  double hard = 0.0;
  for (double e : series.energy) {
    if (e >= 500.0 && e < 1200.0) soft += 1.0;
    if (e >= 2000.0 && e < 7000.0) hard += 1.0;
  }
  return (soft + hard) > 0.0 ? (hard - soft) / (hard + soft) : 0.0;
}

double variability_score(const EventSeries& series) {
  constexpr std::size_t kBins = 24;
  if (series.size() < 2 || series.duration() <= 0.0) return 0.0;
  std::vector<double> counts(kBins, 0.0);
  const double t0 = series.time.front();
  const double T = series.duration();
  for (double t : series.time) {
    auto b = static_cast<std::size_t>((t - t0) / T * kBins);
    counts[std::min(b, kBins - 1)] += 1.0;
  }
  const double mean = static_cast<double>(series.size()) / kBins;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - mean) * (c - mean) / mean;
  const double excess = std::max(0.0, chi2 / static_cast<double>(kBins - 1) - 1.0);
  return 10.0 * (1.0 - std::exp(-excess));
}

std::vector<EventSeries> simulate_dataset(const std::vector<DatasetComponent>& components, std::uint64_t master_seed) {
  std::vector<EventSeries> out;
  for (std::size_t c = 0; c < components.size(); ++c) {
    const auto& component = components[c];
    if (component.count < 1) throw Error(Errc::InvalidConfig, "component counts must be >= 1");
    check_model(component.model);
    const std::string kind(source_kind_name(component.model.kind()));
    for (std::size_t i = 0; i < component.count; ++i) {
      char id[64];
      std::snprintf(id, sizeof(id), "%s_c%zu_%05zu", kind.c_str(), c, i);

      SourceModel model = component.model;
      EventSeries series;
      // Resample on the rare draw that would not pass validation.
      for (std::size_t attempt = 0;; ++attempt) {
        model.seed = derive_seed(master_seed, c, i + attempt * 1'000'003);
        series = sample_series(model);
        if (series.size() >= 2) break;
        if (attempt == 100) throw Error(Errc::DegenerateModel, "model yields fewer than 2 events");
      }
      series.series_id = id;
      series.labels.hardness_ratio = hardness_ratio(series);
      series.labels.variability_index = variability_score(series);
      out.push_back(std::move(series));
    }
  }
  return out;
}

Catalog generate_dataset(const std::vector<DatasetComponent>& components, const fs::path& root,
                         std::uint64_t master_seed) {
  Catalog catalog;
  catalog.root = fs::absolute(root);
  if (components.empty()) return catalog;
  const auto series = simulate_dataset(components, master_seed);
  std::error_code ec;
  fs::create_directories(root / "events", ec);
  if (ec) throw Error(Errc::IoFailure, "cannot create " + (root / "events").string());
  for (const auto& s : series) {
    const fs::path file = catalog.root / "events" / (s.series_id + ".csv");
    write_event_csv(s, file);
    catalog.entries.push_back({s.series_id, file, s.labels});
  }
  write_catalog(catalog, root / "catalog.jsonl");
  return catalog;
}

std::vector<DatasetComponent> standard_classes(std::size_t per_class) {
  constexpr double kDuration = 20000.0;
  constexpr double kBase = 0.05;  // ~1000 events per steady series
  std::vector<DatasetComponent> out;

  SourceModel steady;
  steady.base_rate = kBase;
  steady.duration = kDuration;
  steady.spectrum = {3.1, 0.25};
  out.push_back({steady, per_class});

  SourceModel flare = steady;
  flare.shape = FlareShape{0.5, 300.0, 1500.0, 0.4};
  flare.spectrum = {3.3, 0.25};
  out.push_back({flare, per_class});

  SourceModel dip = steady;
  dip.shape = DipShape{0.95, 0.35, 0.25};
  dip.spectrum = {3.2, 0.25};
  out.push_back({dip, per_class});

  SourceModel pulsating = steady;
  pulsating.shape = PulsatingShape{0.9, kDuration / 4.0};
  pulsating.spectrum = {3.0, 0.25};
  out.push_back({pulsating, per_class});
  return out;
}

}  // namespace eventcube
