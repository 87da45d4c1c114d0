#include "eventcube/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "csv_util.hpp"
#include "eventcube/error.hpp"

namespace eventcube {

namespace {

constexpr std::array<Rgb, 9> kViridis{{
    {0x44, 0x01, 0x54}, {0x48, 0x28, 0x78}, {0x3e, 0x49, 0x89}, {0x31, 0x68, 0x8e}, {0x26, 0x82, 0x8e},
    {0x1f, 0x9e, 0x89}, {0x35, 0xb7, 0x79}, {0x6e, 0xce, 0x58}, {0xfd, 0xe7, 0x25},
}};

constexpr std::array<Rgb, 10> kTab10{{
    {0x1f, 0x77, 0xb4}, {0xff, 0x7f, 0x0e}, {0x2c, 0xa0, 0x2c}, {0xd6, 0x27, 0x28}, {0x94, 0x67, 0xbd},
    {0x8c, 0x56, 0x4b}, {0xe3, 0x77, 0xc2}, {0x7f, 0x7f, 0x7f}, {0xbc, 0xbd, 0x22}, {0x17, 0xbe, 0xcf},
}};

constexpr Rgb kMissing{0xbb, 0xbb, 0xbb};

std::string hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", c[0], c[1], c[2]);
  return buf;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string open_svg(double w, double h) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) +
         "\" height=\"" + num(h) + "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\">\n<rect x=\"0\" y=\"0\" width=\"" +
         num(w) + "\" height=\"" + num(h) + "\" fill=\"#ffffff\"/>\n";
}

std::string text(double x, double y, std::string_view s, std::string_view anchor = "start", int size = 12) {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-family=\"sans-serif\" font-size=\"" +
         std::to_string(size) + "\" text-anchor=\"" + std::string(anchor) + "\">" + escape(s) + "</text>\n";
}

std::string rect(double x, double y, double w, double h, std::string_view fill, std::string_view extra = "") {
  return "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" fill=\"" + std::string(fill) + "\"" + std::string(extra) + "/>\n";
}

std::string axes_frame(double x, double y, double w, double h) {
  return rect(x, y, w, h, "none", " stroke=\"#333333\" stroke-width=\"1\"");
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double unit(double v) const { return hi > lo ? (v - lo) / (hi - lo) : 0.5; }
};

}  // namespace

Rgb viridis(double t) noexcept {
  if (!(t > 0.0)) return kViridis.front();
  if (t >= 1.0) return kViridis.back();
  const double pos = t * static_cast<double>(kViridis.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  const double f = pos - static_cast<double>(i);
  Rgb out{};
  for (int c = 0; c < 3; ++c) {
    const double v = kViridis[i][c] + f * (kViridis[i + 1][c] - kViridis[i][c]);
    out[c] = static_cast<std::uint8_t>(std::lround(v));
  }
  return out;
}

Rgb tab10(std::size_t i) noexcept { return kTab10[i % kTab10.size()]; }

ColorColumn label_column(const Embedding2D& embedding, std::string_view name) {
  ColorColumn col;
  col.name = std::string(name);
  const auto n = embedding.points.size();
  bool any = false;
  if (name == "class_tag") {
    col.discrete = true;
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < n && i < embedding.labels.size(); ++i) {
      if (embedding.labels[i].class_tag) index.emplace(*embedding.labels[i].class_tag, 0);
    }
    std::size_t k = 0;
    for (auto& [tag, code] : index) {
      code = k++;
      col.categories.push_back(tag);
    }
    col.codes.resize(n);
    for (std::size_t i = 0; i < n && i < embedding.labels.size(); ++i) {
      if (const auto& tag = embedding.labels[i].class_tag) {
        col.codes[i] = index.at(*tag);
        any = true;
      }
    }
  } else if (name == "variability_index" || name == "hardness_ratio") {
    col.values.resize(n);
    for (std::size_t i = 0; i < n && i < embedding.labels.size(); ++i) {
      const auto& l = embedding.labels[i];
      col.values[i] = name == "variability_index" ? l.variability_index : l.hardness_ratio;
      any = any || col.values[i].has_value();
    }
  } else {
    throw Error(Errc::InvalidConfig, "unknown colour column '" + std::string(name) + "'");
  }
  if (!any) throw Error(Errc::InvalidConfig, "colour column '" + std::string(name) + "' has no values");
  return col;
}

ColorColumn cluster_column(const ClusterLabels& clusters) {
  ColorColumn col;
  col.name = "cluster";
  col.discrete = true;
  const bool has_noise = clusters.noise_count() > 0;
  if (has_noise) col.categories.push_back("noise");
  for (std::size_t c = 0; c < clusters.cluster_count(); ++c) col.categories.push_back("cluster " + std::to_string(c));
  for (int l : clusters.labels) {
    col.codes.push_back(l < 0 ? 0 : static_cast<std::size_t>(l) + (has_noise ? 1 : 0));
  }
  return col;
}

namespace {

Rgb category_color(const ColorColumn& col, std::size_t code) {
  if (col.name == "cluster" && !col.categories.empty() && col.categories.front() == "noise") {
    return code == 0 ? kMissing : tab10(code - 1);
  }
  return tab10(code);
}

}  // namespace

std::string scatter_svg(const Embedding2D& embedding, const ColorColumn* color) {
  const std::size_t n = embedding.points.size();
  if (n == 0) throw Error(Errc::EmptyEmbedding, "nothing to plot");
  if (embedding.ids.size() != n) throw Error(Errc::DimMismatch, "embedding ids do not match its points");
  if (color && (color->discrete ? color->codes.size() : color->values.size()) != n) {
    throw Error(Errc::DimMismatch, "colour column does not match the embedding");
  }

  constexpr double kPlot = 480.0, kMargin = 40.0, kLegend = 180.0;
  const double width = kPlot + 2 * kMargin + kLegend;
  const double height = kPlot + 2 * kMargin;

  Range xr, yr, vr;
  for (const auto& p : embedding.points) {
    xr.add(p[0]);
    yr.add(p[1]);
  }
  if (color && !color->discrete) {
    for (const auto& v : color->values) {
      if (v) vr.add(*v);
    }
  }

  std::string svg = open_svg(width, height);
  svg += axes_frame(kMargin, kMargin, kPlot, kPlot);
  svg += "<g id=\"points\">\n";
  for (std::size_t i = 0; i < n; ++i) {
    Rgb c = tab10(0);
    if (color) {
      if (color->discrete) {
        c = color->codes[i] ? category_color(*color, *color->codes[i]) : kMissing;
      } else {
        c = color->values[i] ? viridis(vr.unit(*color->values[i])) : kMissing;
      }
    }
    const double x = kMargin + 5.0 + xr.unit(embedding.points[i][0]) * (kPlot - 10.0);
    const double y = kMargin + kPlot - 5.0 - yr.unit(embedding.points[i][1]) * (kPlot - 10.0);
    svg += "<circle cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"3\" fill=\"" + hex(c) + "\" fill-opacity=\"0.8\">";
    if (i < embedding.ids.size()) svg += "<title>" + escape(embedding.ids[i]) + "</title>";
    svg += "</circle>\n";
  }
  svg += "</g>\n";

  const double lx = kMargin * 2 + kPlot;
  svg += "<g id=\"legend\">\n";
  if (!color) {
    svg += text(lx, kMargin + 12, "t-SNE embedding");
  } else if (color->discrete) {
    svg += text(lx, kMargin + 12, color->name);
    for (std::size_t k = 0; k < color->categories.size(); ++k) {
      const double y = kMargin + 24 + 18.0 * static_cast<double>(k);
      svg += rect(lx, y, 12, 12, hex(category_color(*color, k)));
      svg += text(lx + 18, y + 10, color->categories[k]);
    }
  } else {
    svg += text(lx, kMargin + 12, color->name);
    constexpr int kSteps = 32;
    constexpr double kBar = 200.0;
    for (int s = 0; s < kSteps; ++s) {
      const double t = 1.0 - (s + 0.5) / kSteps;
      svg += rect(lx, kMargin + 24 + kBar * s / kSteps, 16, kBar / kSteps + 0.5, hex(viridis(t)));
    }
    svg += text(lx + 22, kMargin + 34, num(vr.hi));
    svg += text(lx + 22, kMargin + 24 + kBar, num(vr.lo));
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

void render_scatter_svg(const Embedding2D& embedding, const ColorColumn* color, const std::filesystem::path& path) {
  detail::write_text(path, scatter_svg(embedding, color));
}

std::vector<std::size_t> light_curve_counts(const EventSeries& series, double bin_seconds) {
  if (!(bin_seconds > 0.0) || !std::isfinite(bin_seconds)) throw Error(Errc::InvalidConfig, "bin width must be positive");
  if (series.time.empty()) return {};
  const auto [lo_it, hi_it] = std::minmax_element(series.time.begin(), series.time.end());
  const double t0 = *lo_it;
  const double span = *hi_it - t0;
  const auto bins = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span / bin_seconds)));
  std::vector<std::size_t> counts(bins, 0);
  for (double t : series.time) {
    const auto b = static_cast<std::size_t>(std::floor((t - t0) / bin_seconds));
    ++counts[std::min(b, bins - 1)];
  }
  return counts;
}

std::string series_svg(const EventSeries& series, double bin_seconds, const MapTensor* map) {
  const auto counts = light_curve_counts(series, bin_seconds);
  constexpr double kW = 640.0, kPanel = 200.0, kMargin = 40.0;
  const double height = kMargin * 2 + kPanel + (map ? kPanel + kMargin : 0.0);

  std::string svg = open_svg(kW + 2 * kMargin, height);
  svg += text(kMargin, 24, series.series_id + " (" + num(bin_seconds) + " s bins)");
  svg += "<g id=\"light-curve\">\n";
  svg += axes_frame(kMargin, kMargin, kW, kPanel);
  const std::size_t peak = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
  if (!counts.empty() && peak > 0) {
    const double bw = kW / static_cast<double>(counts.size());
    std::string pts;
    for (std::size_t b = 0; b < counts.size(); ++b) {
      const double y = kMargin + kPanel - kPanel * static_cast<double>(counts[b]) / static_cast<double>(peak);
      pts += num(kMargin + bw * static_cast<double>(b)) + "," + num(y) + " ";
      pts += num(kMargin + bw * static_cast<double>(b + 1)) + "," + num(y) + " ";
    }
    pts.pop_back();
    svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
  }
  svg += text(kMargin - 4, kMargin + 10, std::to_string(peak), "end", 10);
  svg += text(kMargin - 4, kMargin + kPanel, "0", "end", 10);
  svg += "</g>\n";

  if (map) {
    const double top = kMargin * 2 + kPanel;
    svg += "<g id=\"heatmap\">\n";
    const std::size_t nt = map->dims[0], ne = map->dims[1];
    double vmax = 0.0;
    for (double v : map->values) vmax = std::max(vmax, v);
    const double cw = kW / static_cast<double>(nt), ch = kPanel / static_cast<double>(ne);
    for (std::size_t i = 0; i < nt; ++i) {
      for (std::size_t j = 0; j < ne; ++j) {
        const double v = map->at(i, j);
        const double t = vmax > 0.0 ? v / vmax : 0.0;
        svg += rect(kMargin + cw * static_cast<double>(i), top + kPanel - ch * static_cast<double>(j + 1), cw, ch,
                    hex(viridis(t)));
      }
    }
    svg += axes_frame(kMargin, top, kW, kPanel);
    svg += text(kMargin + kW / 2, top + kPanel + 16, "normalized time", "middle", 10);
    svg += "</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void render_series_svg(const EventSeries& series, double bin_seconds, const MapTensor* map,
                       const std::filesystem::path& path) {
  detail::write_text(path, series_svg(series, bin_seconds, map));
}

std::string cube_mosaic_svg(const CubeTensor& cube) {
  const std::size_t nt = cube.dims[0], ne = cube.dims[1], nd = cube.dims[2];
  if (nt == 0 || ne == 0 || nd == 0 || cube.values.size() != nt * ne * nd) {
    throw Error(Errc::DimMismatch, "cube values do not match its dimensions");
  }
  constexpr double kTile = 120.0, kGap = 12.0, kMargin = 40.0;
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(nd))));
  const std::size_t rows = (nd + cols - 1) / cols;
  const double w = 2 * kMargin + static_cast<double>(cols) * (kTile + kGap) - kGap;
  const double h = 2 * kMargin + static_cast<double>(rows) * (kTile + kGap + 14) - kGap;

  double vmax = 0.0;
  for (double v : cube.values) vmax = std::max(vmax, v);
  std::string svg = open_svg(w, h);
  svg += text(kMargin, 24, cube.series_id + " (gap slices)");
  const double cw = kTile / static_cast<double>(nt), ch = kTile / static_cast<double>(ne);
  for (std::size_t k = 0; k < nd; ++k) {
    const double x0 = kMargin + static_cast<double>(k % cols) * (kTile + kGap);
    const double y0 = kMargin + static_cast<double>(k / cols) * (kTile + kGap + 14);
    svg += "<g id=\"slice-" + std::to_string(k) + "\">\n";
    for (std::size_t i = 0; i < nt; ++i) {
      for (std::size_t j = 0; j < ne; ++j) {
        const double t = vmax > 0.0 ? cube.at(i, j, k) / vmax : 0.0;
        svg += rect(x0 + cw * static_cast<double>(i), y0 + kTile - ch * static_cast<double>(j + 1), cw, ch,
                    hex(viridis(t)));
      }
    }
    svg += axes_frame(x0, y0, kTile, kTile);
    svg += text(x0 + kTile / 2, y0 + kTile + 12, "gap bin " + std::to_string(k), "middle", 10);
    svg += "</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string k_distance_svg(std::span<const double> sorted_distances, double suggested_eps) {
  constexpr double kW = 480.0, kH = 320.0, kMargin = 40.0;
  std::string svg = open_svg(kW + 2 * kMargin, kH + 2 * kMargin);
  svg += axes_frame(kMargin, kMargin, kW, kH);
  Range r;
  for (double d : sorted_distances) r.add(d);
  r.add(suggested_eps);
  if (sorted_distances.size() > 1) {
    std::string pts;
    for (std::size_t i = 0; i < sorted_distances.size(); ++i) {
      const double x = kMargin + kW * static_cast<double>(i) / static_cast<double>(sorted_distances.size() - 1);
      const double y = kMargin + kH - kH * r.unit(sorted_distances[i]);
      pts += num(x) + "," + num(y) + " ";
    }
    pts.pop_back();
    svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
  }
  const double ey = kMargin + kH - kH * r.unit(suggested_eps);
  svg += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(ey) + "\" x2=\"" + num(kMargin + kW) + "\" y2=\"" + num(ey) +
         "\" stroke=\"#d62728\" stroke-dasharray=\"4 3\"/>\n";
  char label[48];
  std::snprintf(label, sizeof(label), "eps = %.4g", suggested_eps);
  svg += text(kMargin + kW - 4, ey - 4, label, "end", 11);
  svg += "</svg>\n";
  return svg;
}

}  // namespace eventcube
