#include <algorithm>
#include <cmath>
#include <string>

#include "eventcube/analyze.hpp"
#include "eventcube/error.hpp"

namespace eventcube {

namespace {

struct Candidate {
  double d2;
  std::size_t row;
  bool operator<(const Candidate& o) const { return d2 < o.d2 || (d2 == o.d2 && row < o.row); }
};

template <typename RowDistance>
std::vector<Candidate> nearest(std::size_t n, std::size_t k, std::size_t skip, RowDistance dist) {
  std::vector<Candidate> all;
  all.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (j != skip) all.push_back({dist(j), j});
  }
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
  all.resize(k);
  return all;
}

double row_distance2(const Eigen::MatrixXd& x, std::size_t a, std::size_t b) {
  double s = 0.0;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double d = x(static_cast<Eigen::Index>(a), c) - x(static_cast<Eigen::Index>(b), c);
    s += d * d;
  }
  return s;
}

void check_k(std::size_t k, std::size_t available) {
  if (k < 1) throw Error(Errc::InvalidConfig, "k must be at least 1");
  if (k > available) {
    throw Error(Errc::KTooLarge, "k=" + std::to_string(k) + " but only " + std::to_string(available) + " candidates");
  }
}

NeighborList to_list(const LatentMatrix& latents, const std::vector<Candidate>& found) {
  NeighborList out;
  for (const auto& c : found) out.neighbors.push_back({c.row, latents.ids[c.row], std::sqrt(c.d2)});
  return out;
}

}  // namespace

NeighborList knn_query(const LatentMatrix& latents, const std::string& id, std::size_t k) {
  const std::size_t self = latents.find(id);
  const std::size_t n = latents.rows();
  check_k(k, n - 1);
  auto out = to_list(latents, nearest(n, k, self, [&](std::size_t j) { return row_distance2(latents.values, self, j); }));
  out.query_id = id;
  return out;
}

NeighborList knn_query(const LatentMatrix& latents, std::span<const double> query, std::size_t k) {
  if (query.size() != latents.dim()) {
    throw Error(Errc::DimMismatch,
                "query has " + std::to_string(query.size()) + " dims, latents have " + std::to_string(latents.dim()));
  }
  const std::size_t n = latents.rows();
  check_k(k, n);
  return to_list(latents, nearest(n, k, n, [&](std::size_t j) {
                   double s = 0.0;
                   for (std::size_t c = 0; c < query.size(); ++c) {
                     const double d = latents.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) - query[c];
                     s += d * d;
                   }
                   return s;
                 }));
}

std::vector<double> anomaly_scores(const Eigen::MatrixXd& points, std::size_t k) {
  const auto n = static_cast<std::size_t>(points.rows());
  check_k(k, n == 0 ? 0 : n - 1);
  std::vector<double> out(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t si = 0; si < static_cast<std::ptrdiff_t>(n); ++si) {
    const auto i = static_cast<std::size_t>(si);
    const auto found = nearest(n, k, i, [&](std::size_t j) { return row_distance2(points, i, j); });
    double s = 0.0;
    for (const auto& c : found) s += std::sqrt(c.d2);
    out[i] = s / static_cast<double>(k);
  }
  return out;
}

}  // namespace eventcube
