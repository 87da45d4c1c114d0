#include "eventcube/embed.hpp"

#include <cmath>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "csv_util.hpp"
#include "eventcube/error.hpp"
#include "eventcube/sae/features.hpp"

namespace eventcube {

namespace fs = std::filesystem;

void LatentMatrix::validate() const {
  if (static_cast<std::size_t>(values.rows()) != ids.size() || labels.size() != ids.size()) {
    throw Error(Errc::DimMismatch, "latent rows, ids and labels disagree in length");
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) throw Error(Errc::DuplicateSeriesId, id);
  }
  if (!values.allFinite()) throw Error(Errc::NonFiniteValue, "latent matrix has non-finite entries");
}

std::size_t LatentMatrix::find(const std::string& id) const {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == id) return i;
  }
  throw Error(Errc::UnknownId, id);
}

LatentMatrix extract_latents(const sae::SaeModel& model, const Catalog& catalog, std::span<const Tensor> tensors) {
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < tensors.size(); ++i) by_id.emplace(tensor_series_id(tensors[i]), i);

  std::vector<Tensor> ordered;
  ordered.reserve(catalog.size());
  for (const auto& entry : catalog.entries) {
    auto it = by_id.find(entry.series_id);
    if (it == by_id.end()) throw Error(Errc::MissingTensor, entry.series_id).with_series(entry.series_id);
    ordered.push_back(tensors[it->second]);
  }

  const auto codes = sae::encode_all(model, ordered);
  LatentMatrix out;
  const auto d = static_cast<Eigen::Index>(model.latent_size());
  out.values.resize(static_cast<Eigen::Index>(codes.size()), d);
  for (std::size_t i = 0; i < codes.size(); ++i) {
    for (Eigen::Index k = 0; k < d; ++k) out.values(static_cast<Eigen::Index>(i), k) = codes[i].z[static_cast<std::size_t>(k)];
    out.ids.push_back(catalog.entries[i].series_id);
    out.labels.push_back(catalog.entries[i].labels);
  }
  return out;
}

LatentMatrix extract_latents(const sae::SaeModel& model, const Catalog& catalog, const fs::path& tensor_dir) {
  std::vector<Tensor> tensors;
  tensors.reserve(catalog.size());
  for (const auto& entry : catalog.entries) {
    fs::path file = tensor_dir / (entry.series_id + ".etdt");
    if (!fs::exists(file)) file = tensor_dir / (entry.series_id + ".etmp");
    if (!fs::exists(file)) throw Error(Errc::MissingTensor, file.string()).with_series(entry.series_id);
    Tensor t = read_tensor(file);
    sae::check_tensor_dims(model, t);
    tensors.push_back(std::move(t));
  }
  return extract_latents(model, catalog, tensors);
}

void write_latents_csv(const LatentMatrix& latents, const fs::path& path) {
  latents.validate();
  std::string text = "series_id";
  for (std::size_t k = 0; k < latents.dim(); ++k) text += ",z" + std::to_string(k);
  text += ",variability_index,hardness_ratio,class_tag\n";
  for (std::size_t i = 0; i < latents.rows(); ++i) {
    detail::check_field(latents.ids[i]);
    text += latents.ids[i];
    for (std::size_t k = 0; k < latents.dim(); ++k) {
      text.push_back(',');
      detail::append_number(text, latents.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
    }
    detail::append_labels(text, latents.labels[i]);
    text.push_back('\n');
  }
  detail::write_text(path, text);
}

LatentMatrix read_latents_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::EmptyFile, path.string());
  const auto header = detail::split_csv(line);
  if (header.size() < 5 || header.front() != "series_id" || header[header.size() - 3] != "variability_index") {
    throw Error(Errc::MissingHeader, path.string(), 1);
  }
  const std::size_t d = header.size() - 4;

  LatentMatrix out;
  std::vector<double> flat;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = detail::split_csv(line);
    if (f.size() != header.size()) throw Error(Errc::MalformedRow, "field count", line_no);
    out.ids.emplace_back(f[0]);
    for (std::size_t k = 0; k < d; ++k) flat.push_back(detail::parse_number(f[1 + k], line_no));
    out.labels.push_back(detail::parse_labels(f[d + 1], f[d + 2], f[d + 3], line_no));
  }
  out.values.resize(static_cast<Eigen::Index>(out.ids.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < out.ids.size(); ++i) {
    for (std::size_t k = 0; k < d; ++k) out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = flat[i * d + k];
  }
  out.validate();
  return out;
}

void write_embedding_csv(const Embedding2D& embedding, const fs::path& path) {
  std::string text = "series_id,x,y,variability_index,hardness_ratio,class_tag\n";
  for (std::size_t i = 0; i < embedding.points.size(); ++i) {
    detail::check_field(embedding.ids[i]);
    text += embedding.ids[i];
    text.push_back(',');
    detail::append_number(text, embedding.points[i][0]);
    text.push_back(',');
    detail::append_number(text, embedding.points[i][1]);
    detail::append_labels(text, i < embedding.labels.size() ? embedding.labels[i] : SeriesLabels{});
    text.push_back('\n');
  }
  detail::write_text(path, text);
}

Embedding2D read_embedding_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::EmptyFile, path.string());
  const auto header = detail::split_csv(line);
  if (header.size() != 6 || header[0] != "series_id" || header[1] != "x" || header[2] != "y") {
    throw Error(Errc::MissingHeader, path.string(), 1);
  }
  Embedding2D out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = detail::split_csv(line);
    if (f.size() != 6) throw Error(Errc::MalformedRow, "field count", line_no);
    out.ids.emplace_back(f[0]);
    out.points.push_back({detail::parse_number(f[1], line_no), detail::parse_number(f[2], line_no)});
    out.labels.push_back(detail::parse_labels(f[3], f[4], f[5], line_no));
  }
  return out;
}

double silhouette_score(const Eigen::MatrixXd& points, std::span<const int> labels) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (labels.size() != n) throw Error(Errc::DimMismatch, "labels do not match points");
  if (n == 0) throw Error(Errc::EmptyInput, "silhouette of an empty set");
  std::unordered_map<int, std::size_t> sizes;
  for (int l : labels) ++sizes[l];
  if (sizes.size() < 2) throw Error(Errc::DegenerateLabels, "silhouette needs at least two labels");

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::unordered_map<int, double> sum;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      sum[labels[j]] += (points.row(static_cast<Eigen::Index>(i)) - points.row(static_cast<Eigen::Index>(j))).norm();
    }
    const int own = labels[i];
    if (sizes[own] < 2) continue;
    const double a = sum[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [label, s] : sum) {
      if (label != own) b = std::min(b, s / static_cast<double>(sizes[label]));
    }
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<double>(n);
}

}  // namespace eventcube
