#include "eventcube/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "eventcube/error.hpp"
#include "json_labels.hpp"

namespace eventcube {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool parse_double(std::string_view text, double& out) {
  // from_chars rejects a leading '+', which is valid decimal input.
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

void append_double(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

EventSeries parse_event_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());

  EventSeries series;
  series.series_id = path.stem().string();

  std::string line;
  if (!std::getline(in, line) || trim(line) != "time,energy") {
    throw Error(Errc::MissingHeader, path.string(), 1);
  }

  std::size_t line_no = 1;
  bool saw_blank = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view row = trim(line);
    if (row.empty()) {
      saw_blank = true;
      continue;
    }
    if (saw_blank) throw Error(Errc::MalformedRow, "blank line inside data", line_no - 1);
    auto comma = row.find(',');
    if (comma == std::string_view::npos) throw Error(Errc::MalformedRow, path.string(), line_no);
    double t = 0.0;
    double e = 0.0;
    if (!parse_double(trim(row.substr(0, comma)), t) ||
        !parse_double(trim(row.substr(comma + 1)), e)) {
      throw Error(Errc::MalformedRow, path.string(), line_no);
    }
    if (!std::isfinite(t) || !std::isfinite(e)) {
      throw Error(Errc::NonFiniteValue, path.string(), line_no);
    }
    series.time.push_back(t);
    series.energy.push_back(e);
  }
  if (series.time.empty()) throw Error(Errc::EmptyFile, path.string());
  return series;
}

void write_event_csv(const EventSeries& series, const fs::path& path) {
  std::string text = "time,energy\n";
  text.reserve(text.size() + series.size() * 24);
  for (std::size_t i = 0; i < series.size(); ++i) {
    append_double(text, series.time[i]);
    text.push_back(',');
    append_double(text, series.energy[i]);
    text.push_back('\n');
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(Errc::IoFailure, "short write to " + path.string());
}

EventSeries validate_series(EventSeries raw, const ValidationPolicy& policy) {
  if (raw.time.size() != raw.energy.size()) {
    throw Error(Errc::DimMismatch, "time and energy lengths differ");
  }
  if (raw.size() < std::max<std::size_t>(policy.min_events, 1)) {
    throw Error(Errc::TooFewEvents, std::to_string(raw.size()) + " events, need " +
                                        std::to_string(policy.min_events));
  }
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw.time[i]) || !std::isfinite(raw.energy[i])) {
      throw Error(Errc::NonFiniteValue, "row " + std::to_string(i));
    }
    if (policy.require_positive_modality && raw.energy[i] <= 0.0) {
      throw Error(Errc::NonPositiveModality, "row " + std::to_string(i));
    }
  }

  // Ties on time are ordered by energy so that any row permutation of the
  // input validates to the same series.
  auto before = [&](std::size_t a, std::size_t b) {
    return raw.time[a] < raw.time[b] || (raw.time[a] == raw.time[b] && raw.energy[a] < raw.energy[b]);
  };
  std::vector<std::size_t> order(raw.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (!std::is_sorted(order.begin(), order.end(), before)) {
    std::stable_sort(order.begin(), order.end(), before);
    std::vector<double> t(raw.size());
    std::vector<double> e(raw.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      t[i] = raw.time[order[i]];
      e[i] = raw.energy[order[i]];
    }
    raw.time = std::move(t);
    raw.energy = std::move(e);
  }
  return raw;
}

Catalog load_catalog(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());

  Catalog catalog;
  catalog.root = fs::absolute(path).parent_path();
  std::unordered_set<std::string> seen;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      throw Error(Errc::MalformedEntry, "invalid JSON", line_no);
    }
    if (!j.is_object() || !j.contains("series_id") || !j["series_id"].is_string() ||
        !j.contains("file") || !j["file"].is_string()) {
      throw Error(Errc::MalformedEntry, "entry needs string fields series_id and file", line_no);
    }
    CatalogEntry entry;
    entry.series_id = j["series_id"].get<std::string>();
    fs::path file = j["file"].get<std::string>();
    entry.file = file.is_absolute() ? file : (catalog.root / file).lexically_normal();
    if (j.contains("labels")) {
      try {
        entry.labels = detail::labels_from_json(j["labels"]);
      } catch (const std::exception& e) {
        throw Error(Errc::MalformedEntry, e.what(), line_no);
      }
    }
    if (!seen.insert(entry.series_id).second) {
      throw Error(Errc::DuplicateSeriesId, entry.series_id, line_no);
    }
    if (!fs::exists(entry.file)) {
      throw Error(Errc::UnresolvablePath, entry.file.string(), line_no);
    }
    catalog.entries.push_back(std::move(entry));
  }
  return catalog;
}

void write_catalog(const Catalog& catalog, const fs::path& path) {
  const fs::path dir = fs::absolute(path).parent_path();
  std::string text;
  for (const auto& entry : catalog.entries) {
    json j;
    j["series_id"] = entry.series_id;
    fs::path file = entry.file;
    if (file.is_absolute()) {
      fs::path rel = file.lexically_relative(dir);
      if (!rel.empty() && *rel.begin() != "..") file = rel;
    }
    j["file"] = file.generic_string();
    if (!entry.labels.empty()) j["labels"] = detail::labels_to_json(entry.labels);
    text += j.dump();
    text.push_back('\n');
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

EventSeries load_series(const CatalogEntry& entry, const ValidationPolicy& policy) {
  try {
    EventSeries raw = parse_event_csv(entry.file);
    raw.series_id = entry.series_id;
    raw.labels = entry.labels;
    return validate_series(std::move(raw), policy);
  } catch (const Error& e) {
    throw e.with_series(entry.series_id);
  }
}

SplitSizes split_sizes(std::size_t n) {
  SplitSizes s;
  s.test = (n + 9) / 10;  // ceil(0.1 n)
  const std::size_t rest = n - s.test;
  s.val = (rest + 4) / 5;  // ceil(0.2 rest)
  s.train = rest - s.val;
  return s;
}

IndexSplit split_indices(std::size_t n, std::uint64_t seed) {
  if (n < 10) throw Error(Errc::TooSmall, std::to_string(n) + " entries, need at least 10");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const SplitSizes s = split_sizes(n);
  IndexSplit out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(s.train));
  out.val.assign(order.begin() + static_cast<std::ptrdiff_t>(s.train),
                 order.begin() + static_cast<std::ptrdiff_t>(s.train + s.val));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(s.train + s.val), order.end());
  return out;
}

CatalogSplit split_catalog(const Catalog& catalog, std::uint64_t seed) {
  const IndexSplit idx = split_indices(catalog.size(), seed);
  CatalogSplit out;
  out.train.root = out.val.root = out.test.root = catalog.root;
  auto take = [&](const std::vector<std::size_t>& rows, Catalog& dst) {
    dst.entries.reserve(rows.size());
    for (std::size_t r : rows) dst.entries.push_back(catalog.entries[r]);
  };
  take(idx.train, out.train);
  take(idx.val, out.val);
  take(idx.test, out.test);
  return out;
}

}  // namespace eventcube
