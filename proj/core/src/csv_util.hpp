#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eventcube/error.hpp"
#include "eventcube/ingest.hpp"

namespace eventcube::detail {

inline std::vector<std::string_view> split_csv(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline void append_number(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

inline double parse_number(std::string_view text, std::size_t line_no) {
  double v = 0.0;
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end) throw Error(Errc::MalformedRow, std::string(text), line_no);
  return v;
}

inline void check_field(std::string_view s) {
  if (s.find_first_of(",\n\r\"") != std::string_view::npos) {
    throw Error(Errc::InvalidConfig, "field '" + std::string(s) + "' contains a CSV delimiter");
  }
}

/// Appends `,variability_index,hardness_ratio,class_tag` values (empty if unset).
inline void append_labels(std::string& out, const SeriesLabels& labels) {
  out.push_back(',');
  if (labels.variability_index) append_number(out, *labels.variability_index);
  out.push_back(',');
  if (labels.hardness_ratio) append_number(out, *labels.hardness_ratio);
  out.push_back(',');
  if (labels.class_tag) {
    check_field(*labels.class_tag);
    out += *labels.class_tag;
  }
}

inline SeriesLabels parse_labels(std::string_view vi, std::string_view hr, std::string_view tag, std::size_t line_no) {
  SeriesLabels labels;
  if (!vi.empty()) labels.variability_index = parse_number(vi, line_no);
  if (!hr.empty()) labels.hardness_ratio = parse_number(hr, line_no);
  if (!tag.empty()) labels.class_tag = std::string(tag);
  return labels;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(Errc::IoFailure, "short write to " + path.string());
}

}  // namespace eventcube::detail
