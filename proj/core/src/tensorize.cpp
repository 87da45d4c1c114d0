#include "eventcube/tensorize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "byte_io.hpp"
#include "eventcube/error.hpp"

namespace eventcube {

namespace {

constexpr char kCubeMagic[4] = {'E', 'T', 'D', 'T'};
constexpr char kMapMagic[4] = {'E', 'T', 'M', 'P'};

void apply_scaling(std::vector<double>& values, CountScaling scaling, std::size_t n_events) {
  switch (scaling) {
    case CountScaling::Raw:
      break;
    case CountScaling::UnitSum: {
      const double inv = n_events > 0 ? 1.0 / static_cast<double>(n_events) : 0.0;
      for (double& v : values) v *= inv;
      break;
    }
    case CountScaling::Log1p:
      for (double& v : values) v = std::log1p(v);
      break;
  }
}

}  // namespace

void BinningConfig::validate() const {
  if (n_tau < 1 || n_eps < 1) throw Error(Errc::InvalidConfig, "n_tau and n_eps must be >= 1");
  if (const auto* g = std::get_if<GlobalBounds>(&bounds)) {
    if (!(g->lo < g->hi) || !std::isfinite(g->lo) || !std::isfinite(g->hi)) {
      throw Error(Errc::InvalidConfig, "global bounds need finite lo < hi");
    }
  }
}

std::string_view transform_name(ModalityTransform t) noexcept {
  return t == ModalityTransform::Log10 ? "log10" : "identity";
}

std::string_view scaling_name(CountScaling s) noexcept {
  switch (s) {
    case CountScaling::Raw: return "raw";
    case CountScaling::UnitSum: return "unit_sum";
    case CountScaling::Log1p: return "log1p";
  }
  return "unknown";
}

ModalityTransform parse_transform(std::string_view name) {
  if (name == "log10") return ModalityTransform::Log10;
  if (name == "identity") return ModalityTransform::Identity;
  throw Error(Errc::InvalidConfig, "unknown modality transform '" + std::string(name) + "'");
}

CountScaling parse_scaling(std::string_view name) {
  if (name == "raw") return CountScaling::Raw;
  if (name == "unit_sum") return CountScaling::UnitSum;
  if (name == "log1p") return CountScaling::Log1p;
  throw Error(Errc::InvalidConfig, "unknown count scaling '" + std::string(name) + "'");
}

double transform_modality(double value, ModalityTransform transform) {
  if (transform == ModalityTransform::Identity) return value;
  if (!(value > 0.0)) throw Error(Errc::NonPositiveModality, "log10 of " + std::to_string(value));
  return std::log10(value);
}

GlobalBounds compute_global_bounds(std::span<const EventSeries> dataset, ModalityTransform transform) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& s : dataset) {
    for (double e : s.energy) {
      const double v = transform_modality(e, transform);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(lo <= hi)) throw Error(Errc::EmptyInput, "no events to derive modality bounds from");
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  return {lo, hi};
}

BinningConfig resolve_bounds(BinningConfig cfg, std::span<const EventSeries> dataset) {
  if (std::holds_alternative<DatasetBounds>(cfg.bounds)) {
    cfg.bounds = compute_global_bounds(dataset, cfg.transform);
  }
  return cfg;
}

double NormalizedSeries::eps_coord(std::size_t k) const noexcept {
  if (!(eps_max > eps_min)) return 0.0;
  const double c = (eps[k] - eps_min) / (eps_max - eps_min);
  return std::clamp(c, 0.0, 1.0);
}

NormalizedSeries normalize_series(const EventSeries& series, const BinningConfig& cfg) {
  cfg.validate();
  const std::size_t n = series.size();
  if (series.energy.size() != n) throw Error(Errc::DimMismatch, "time and energy lengths differ");
  if (n == 0 || (n < 2 && cfg.strict)) {
    throw Error(Errc::TooFewEvents, std::to_string(n) + " events").with_series(series.series_id);
  }

  NormalizedSeries ns;
  ns.series_id = series.series_id;
  ns.tau.resize(n);
  ns.eps.resize(n);
  ns.dtau.assign(n, 0.0);

  const double t1 = series.time.front();
  const double T = series.time.back() - t1;
  for (std::size_t k = 0; k < n; ++k) {
    ns.tau[k] = T > 0.0 ? (series.time[k] - t1) / T : 0.0;
  }

  try {
    for (std::size_t k = 0; k < n; ++k) ns.eps[k] = transform_modality(series.energy[k], cfg.transform);
  } catch (const Error& e) {
    throw e.with_series(series.series_id);
  }

  if (std::holds_alternative<GlobalBounds>(cfg.bounds)) {
    const auto& g = std::get<GlobalBounds>(cfg.bounds);
    ns.eps_min = g.lo;
    ns.eps_max = g.hi;
    ns.clamp_eps = true;
  } else if (std::holds_alternative<PerSeriesBounds>(cfg.bounds)) {
    const auto [mn, mx] = std::minmax_element(ns.eps.begin(), ns.eps.end());
    ns.eps_min = *mn;
    ns.eps_max = *mx;
  } else {
    throw Error(Errc::InvalidConfig, "dataset bounds must be resolved before normalizing");
  }

  if (n >= 2) {
    std::vector<double> gaps(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) gaps[k] = series.time[k + 1] - series.time[k];
    const auto [gmin_it, gmax_it] = std::minmax_element(gaps.begin(), gaps.end());
    const double gmin = *gmin_it;
    const double span = *gmax_it - gmin;
    for (std::size_t k = 0; k < n; ++k) {
      const double g = gaps[k == 0 ? 0 : k - 1];
      ns.dtau[k] = span > 0.0 ? (g - gmin) / span : 0.0;
    }
  }
  return ns;
}

std::uint32_t bin_index(double coord, std::uint32_t n) noexcept {
  if (!(coord > 0.0)) return 0;  // also maps NaN to 0
  if (coord >= 1.0) return n - 1;
  return std::min(static_cast<std::uint32_t>(std::floor(coord * n)), n - 1);
}

CubeTensor bin_cube(const NormalizedSeries& ns, const BinningConfig& cfg) {
  cfg.validate();
  if (cfg.n_dtau < 1) throw Error(Errc::InvalidConfig, "bin_cube needs n_dtau >= 1");
  CubeTensor cube;
  cube.dims = {cfg.n_tau, cfg.n_eps, cfg.n_dtau};
  cube.scaling = cfg.scaling;
  cube.series_id = ns.series_id;
  cube.values.assign(static_cast<std::size_t>(cfg.n_tau) * cfg.n_eps * cfg.n_dtau, 0.0);
  for (std::size_t k = 0; k < ns.size(); ++k) {
    const auto i = bin_index(ns.tau[k], cfg.n_tau);
    const auto j = bin_index(ns.eps_coord(k), cfg.n_eps);
    const auto l = bin_index(ns.dtau[k], cfg.n_dtau);
    cube.values[cube.index(i, j, l)] += 1.0;
  }
  apply_scaling(cube.values, cfg.scaling, ns.size());
  return cube;
}

MapTensor bin_map(const NormalizedSeries& ns, const BinningConfig& cfg) {
  cfg.validate();
  MapTensor map;
  map.dims = {cfg.n_tau, cfg.n_eps};
  map.scaling = cfg.scaling;
  map.series_id = ns.series_id;
  map.values.assign(static_cast<std::size_t>(cfg.n_tau) * cfg.n_eps, 0.0);
  for (std::size_t k = 0; k < ns.size(); ++k) {
    const auto i = bin_index(ns.tau[k], cfg.n_tau);
    const auto j = bin_index(ns.eps_coord(k), cfg.n_eps);
    map.values[map.index(i, j)] += 1.0;
  }
  apply_scaling(map.values, cfg.scaling, ns.size());
  return map;
}

Tensor tensorize(const EventSeries& series, const BinningConfig& cfg) {
  const NormalizedSeries ns = normalize_series(series, cfg);
  if (cfg.is_map()) return bin_map(ns, cfg);
  return bin_cube(ns, cfg);
}

std::span<const double> tensor_values(const Tensor& t) noexcept {
  return std::visit([](const auto& x) { return std::span<const double>(x.values); }, t);
}

std::vector<std::uint32_t> tensor_dims(const Tensor& t) {
  return std::visit([](const auto& x) { return std::vector<std::uint32_t>(x.dims.begin(), x.dims.end()); }, t);
}

const std::string& tensor_series_id(const Tensor& t) noexcept {
  return std::visit([](const auto& x) -> const std::string& { return x.series_id; }, t);
}

CountScaling tensor_scaling(const Tensor& t) noexcept {
  return std::visit([](const auto& x) { return x.scaling; }, t);
}

std::string_view tensor_extension(const Tensor& t) noexcept {
  return std::holds_alternative<CubeTensor>(t) ? ".etdt" : ".etmp";
}

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  detail::ByteWriter w;
  const bool cube = std::holds_alternative<CubeTensor>(t);
  w.bytes(std::string_view(cube ? kCubeMagic : kMapMagic, 4));
  w.u16(kTensorFormatVersion);
  w.u8(static_cast<std::uint8_t>(tensor_scaling(t)));
  for (std::uint32_t d : tensor_dims(t)) w.u32(d);
  w.u32(0);  // reserved
  for (double v : tensor_values(t)) w.f32(static_cast<float>(v));
  const std::string& id = tensor_series_id(t);
  if (id.size() > 0xFFFF) throw Error(Errc::InvalidConfig, "series id longer than 65535 bytes");
  w.u16(static_cast<std::uint16_t>(id.size()));
  w.bytes(id);
  return std::move(w.buffer());
}

void write_tensor(const Tensor& t, const std::filesystem::path& path) {
  detail::write_file_bytes(path, encode_tensor(t));
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  if (r.remaining() < 4) throw Error(Errc::BadMagic, "file shorter than magic");
  const std::string magic = r.bytes(4);
  const bool cube = magic == std::string_view(kCubeMagic, 4);
  if (!cube && magic != std::string_view(kMapMagic, 4)) throw Error(Errc::BadMagic, "not a tensor file");
  const std::uint16_t version = r.u16();
  if (version != kTensorFormatVersion) {
    throw Error(Errc::VersionMismatch, "tensor version " + std::to_string(version));
  }
  const std::uint8_t code = r.u8();
  if (code > static_cast<std::uint8_t>(CountScaling::Log1p)) {
    throw Error(Errc::VersionMismatch, "unknown count scaling code " + std::to_string(code));
  }
  const auto scaling = static_cast<CountScaling>(code);

  const std::size_t rank = cube ? 3 : 2;
  std::array<std::uint32_t, 3> dims{1, 1, 1};
  std::size_t cells = 1;
  for (std::size_t i = 0; i < rank; ++i) {
    dims[i] = r.u32();
    if (dims[i] == 0) throw Error(Errc::DimMismatch, "zero-length axis");
    cells *= dims[i];
  }
  r.u32();  // reserved

  if (cells > r.remaining() / 4) throw Error(Errc::TruncatedFile, "payload shorter than header dims");
  std::vector<double> values(cells);
  for (double& v : values) v = r.f32();
  const std::uint16_t id_len = r.u16();
  std::string id = r.bytes(id_len);
  if (r.remaining() != 0) throw Error(Errc::DimMismatch, "trailing bytes after series id");

  if (cube) {
    CubeTensor c;
    c.dims = dims;
    c.scaling = scaling;
    c.values = std::move(values);
    c.series_id = std::move(id);
    return c;
  }
  MapTensor m;
  m.dims = {dims[0], dims[1]};
  m.scaling = scaling;
  m.values = std::move(values);
  m.series_id = std::move(id);
  return m;
}

Tensor read_tensor(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  return decode_tensor(bytes);
}

}  // namespace eventcube
