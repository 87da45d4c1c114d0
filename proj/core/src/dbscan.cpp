#include <algorithm>
#include <cmath>
#include <deque>

#include "eventcube/analyze.hpp"
#include "eventcube/error.hpp"

namespace eventcube {

namespace {

constexpr int kUnvisited = -2;
constexpr int kNoise = -1;

double squared_distance(const Eigen::MatrixXd& x, Eigen::Index a, Eigen::Index b) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    const double d = x(a, k) - x(b, k);
    s += d * d;
  }
  return s;
}

std::vector<std::size_t> region(const Eigen::MatrixXd& x, std::size_t i, double eps2) {
  std::vector<std::size_t> out;
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    if (squared_distance(x, static_cast<Eigen::Index>(i), j) <= eps2) out.push_back(static_cast<std::size_t>(j));
  }
  return out;
}

}  // namespace

std::size_t ClusterLabels::cluster_count() const {
  int top = -1;
  for (int l : labels) top = std::max(top, l);
  return static_cast<std::size_t>(top + 1);
}

std::size_t ClusterLabels::noise_count() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kNoise));
}

ClusterLabels dbscan(const Eigen::MatrixXd& points, double eps, std::size_t min_pts) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw Error(Errc::InvalidConfig, "eps must be positive");
  if (min_pts < 1) throw Error(Errc::InvalidConfig, "min_pts must be at least 1");

  const auto n = static_cast<std::size_t>(points.rows());
  const double eps2 = eps * eps;
  ClusterLabels out;
  out.eps = eps;
  out.min_pts = min_pts;
  out.labels.assign(n, kUnvisited);
  out.core.assign(n, false);

  int cluster = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (out.labels[i] != kUnvisited) continue;
    const auto seeds = region(points, i, eps2);
    if (seeds.size() < min_pts) {
      out.labels[i] = kNoise;
      continue;
    }
    out.core[i] = true;
    out.labels[i] = cluster;
    std::deque<std::size_t> queue(seeds.begin(), seeds.end());
    while (!queue.empty()) {
      const std::size_t q = queue.front();
      queue.pop_front();
      if (out.labels[q] == kNoise) out.labels[q] = cluster;
      if (out.labels[q] != kUnvisited) continue;
      out.labels[q] = cluster;
      const auto more = region(points, q, eps2);
      if (more.size() >= min_pts) {
        out.core[q] = true;
        queue.insert(queue.end(), more.begin(), more.end());
      }
    }
    ++cluster;
  }
  return out;
}

std::vector<double> k_distances(const Eigen::MatrixXd& points, std::size_t k) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (k < 1) throw Error(Errc::InvalidConfig, "k must be at least 1");
  if (k >= n) throw Error(Errc::KTooLarge, "k=" + std::to_string(k) + " with " + std::to_string(n) + " rows");
  std::vector<double> out(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t si = 0; si < static_cast<std::ptrdiff_t>(n); ++si) {
    std::vector<double> d;
    d.reserve(n - 1);
    for (Eigen::Index j = 0; j < points.rows(); ++j) {
      if (j != si) d.push_back(squared_distance(points, si, j));
    }
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k - 1), d.end());
    out[static_cast<std::size_t>(si)] = std::sqrt(d[k - 1]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& points) {
  Eigen::MatrixXd out = points;
  if (points.rows() == 0) return out;
  const auto n = static_cast<double>(points.rows());
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    auto col = out.col(j);
    col.array() -= col.mean();
    const double sd = std::sqrt(col.squaredNorm() / n);
    if (sd > 0.0) col /= sd;
  }
  return out;
}

double suggest_eps(const Eigen::MatrixXd& points, std::size_t min_pts) {
  const auto d = k_distances(points, std::max<std::size_t>(min_pts, 2) - 1);
  const std::size_t n = d.size();
  double knee = d.back();
  if (n > 2 && d.back() > d.front()) {
    // Normalize both axes to [0, 1] so the chord is the diagonal.
    const double span = d.back() - d.front();
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = static_cast<double>(i) / static_cast<double>(n - 1);
      const double y = (d[i] - d.front()) / span;
      const double gap = x - y;  // distance below the diagonal, up to a constant
      if (gap > best) {
        best = gap;
        knee = d[i];
      }
    }
  }
  if (knee > 0.0) return knee;
  for (double v : d) {
    if (v > 0.0) return v;
  }
  return 1.0;
}

}  // namespace eventcube
