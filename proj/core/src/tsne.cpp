#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "eventcube/embed.hpp"
#include "eventcube/error.hpp"

namespace eventcube {

namespace {

constexpr double kTolerance = 1e-5;
constexpr int kMaxSteps = 50;

struct Entropy {
  double h = 0.0;  // nats
  double sum = 0.0;
};

// Fills `p` with unnormalized exp(-beta * (d - d_min)) and returns the entropy
// of the normalized distribution.
Entropy row_entropy(std::span<const double> d, double d_min, double beta, std::vector<double>& p) {
  Entropy e;
  double weighted = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    const double shifted = d[j] - d_min;
    p[j] = std::exp(-beta * shifted);
    e.sum += p[j];
    weighted += shifted * p[j];
  }
  e.h = std::log(e.sum) + beta * weighted / e.sum;
  return e;
}

std::vector<double> squared_distances(const Eigen::MatrixXd& x) {
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<double> d(n * n, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (static_cast<std::size_t>(i) == j) continue;
      double s = 0.0;
      for (Eigen::Index k = 0; k < x.cols(); ++k) {
        const double diff = x(i, k) - x(static_cast<Eigen::Index>(j), k);
        s += diff * diff;
      }
      d[static_cast<std::size_t>(i) * n + j] = s;
    }
  }
  return d;
}

}  // namespace

Calibration perplexity_calibration(std::span<const double> squared_distances, double target_perplexity) {
  if (!(target_perplexity > 0.0)) throw Error(Errc::InvalidConfig, "perplexity must be positive");
  Calibration out;
  const std::size_t m = squared_distances.size();
  if (m == 0) throw Error(Errc::TooFewPoints, "calibration needs at least one neighbour");
  if (m == 1) {
    out.probabilities = {1.0};
    out.perplexity = 1.0;
    out.converged = true;
    return out;
  }

  const double d_min = *std::min_element(squared_distances.begin(), squared_distances.end());
  double mean_shift = 0.0;
  for (double d : squared_distances) mean_shift += d - d_min;
  mean_shift /= static_cast<double>(m);

  const double log_target = std::log(target_perplexity);
  double beta = mean_shift > 0.0 ? 1.0 / mean_shift : 1.0;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  double best_beta = beta;
  double best_gap = std::numeric_limits<double>::infinity();

  std::vector<double> p(m);
  for (int step = 1; step <= kMaxSteps; ++step) {
    const auto e = row_entropy(squared_distances, d_min, beta, p);
    const double gap = e.h - log_target;
    out.iterations = step;
    if (std::abs(gap) < best_gap) {
      best_gap = std::abs(gap);
      best_beta = beta;
    }
    if (std::abs(gap) < kTolerance) {
      out.converged = true;
      break;
    }
    if (gap > 0.0) {
      lo = beta;
      beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
    } else {
      hi = beta;
      beta = 0.5 * (beta + lo);
    }
  }

  const auto e = row_entropy(squared_distances, d_min, best_beta, p);
  for (double& v : p) v /= e.sum;
  out.probabilities = std::move(p);
  out.beta = best_beta;
  out.perplexity = std::exp(e.h);
  return out;
}

std::vector<double> joint_probabilities(const Eigen::MatrixXd& points, double perplexity,
                                        std::size_t* unconverged_rows) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (n < 2) throw Error(Errc::TooFewPoints, "joint affinities need at least two points");
  const auto d = squared_distances(points);

  std::vector<double> cond(n * n, 0.0);
  std::vector<char> converged(n, 1);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t si = 0; si < static_cast<std::ptrdiff_t>(n); ++si) {
    const auto i = static_cast<std::size_t>(si);
    std::vector<double> row;
    row.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) row.push_back(d[i * n + j]);
    }
    const auto cal = perplexity_calibration(row, perplexity);
    converged[i] = cal.converged ? 1 : 0;
    std::size_t k = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) cond[i * n + j] = cal.probabilities[k++];
    }
  }
  if (unconverged_rows) *unconverged_rows = static_cast<std::size_t>(std::count(converged.begin(), converged.end(), 0));

  std::vector<double> p(n * n, 0.0);
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = (cond[i * n + j] + cond[j * n + i]) * scale;
      p[i * n + j] = v;
      p[j * n + i] = v;
    }
  }
  return p;
}

namespace {

// Unnormalized Student-t kernel (1 + |yi - yj|^2)^-1 with zero diagonal; returns the total.
double student_kernel(std::span<const std::array<double, 2>> y, std::vector<double>& num) {
  const std::size_t n = y.size();
  num.assign(n * n, 0.0);
  std::vector<double> row_sum(n, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t si = 0; si < static_cast<std::ptrdiff_t>(n); ++si) {
    const auto i = static_cast<std::size_t>(si);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dx = y[i][0] - y[j][0];
      const double dy = y[i][1] - y[j][1];
      const double v = 1.0 / (1.0 + dx * dx + dy * dy);
      num[i * n + j] = v;
      s += v;
    }
    row_sum[i] = s;
  }
  double total = 0.0;
  for (double s : row_sum) total += s;
  return total;
}

}  // namespace

std::vector<double> student_t_affinities(std::span<const std::array<double, 2>> points) {
  std::vector<double> num;
  const double total = student_kernel(points, num);
  if (total > 0.0) {
    for (double& v : num) v /= total;
  }
  return num;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error(Errc::DimMismatch, "KL operands differ in size");
  constexpr double kFloor = 1e-300;
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) kl += p[i] * std::log(p[i] / std::max(q[i], kFloor));
  }
  return kl;
}

Embedding2D tsne_project(const LatentMatrix& latents, const TsneConfig& cfg) {
  latents.validate();
  const std::size_t n = latents.rows();
  if (n < 5) throw Error(Errc::TooFewPoints, "t-SNE needs at least 5 points, got " + std::to_string(n));
  if (!(cfg.perplexity > 0.0) || !(cfg.learning_rate > 0.0) || cfg.iterations == 0) {
    throw Error(Errc::InvalidConfig, "t-SNE perplexity, learning rate and iterations must be positive");
  }

  Embedding2D out;
  out.ids = latents.ids;
  out.labels = latents.labels;
  if (cfg.perplexity >= static_cast<double>(n - 1) / 3.0) {
    out.warnings.push_back("perplexity " + std::to_string(cfg.perplexity) + " is large for " + std::to_string(n) +
                           " points; recommended below " + std::to_string(static_cast<double>(n - 1) / 3.0));
  }

  std::size_t unconverged = 0;
  const auto p = joint_probabilities(latents.values, cfg.perplexity, &unconverged);
  if (unconverged > 0) {
    out.warnings.push_back(std::to_string(unconverged) + " rows did not reach the target perplexity");
  }

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> init(0.0, cfg.init_sigma);
  auto& y = out.points;
  y.resize(n);
  for (auto& pt : y) {
    pt[0] = init(rng);
    pt[1] = init(rng);
  }

  std::vector<std::array<double, 2>> update(n, {0.0, 0.0});
  std::vector<std::array<double, 2>> gains(n, {1.0, 1.0});
  std::vector<std::array<double, 2>> grad(n);
  std::vector<double> num;
  out.kl_history.reserve(cfg.iterations);

  for (std::size_t iter = 0; iter < cfg.iterations; ++iter) {
    const double exaggeration = iter < cfg.exaggeration_iters ? cfg.early_exaggeration : 1.0;
    const double momentum = iter < cfg.momentum_switch_iter ? cfg.initial_momentum : cfg.final_momentum;

    const double total = std::max(student_kernel(y, num), std::numeric_limits<double>::min());
    const double inv_total = 1.0 / total;

    std::vector<double> row_kl(n, 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t si = 0; si < static_cast<std::ptrdiff_t>(n); ++si) {
      const auto i = static_cast<std::size_t>(si);
      double gx = 0.0, gy = 0.0, kl = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double nij = num[i * n + j];
        const double qij = nij * inv_total;
        const double pij = p[i * n + j];
        const double w = (exaggeration * pij - qij) * nij;
        gx += w * (y[i][0] - y[j][0]);
        gy += w * (y[i][1] - y[j][1]);
        if (pij > 0.0) kl += pij * std::log(pij / std::max(qij, 1e-300));
      }
      grad[i] = {4.0 * gx, 4.0 * gy};
      row_kl[i] = kl;
    }
    double kl = 0.0;
    for (double v : row_kl) kl += v;
    out.kl_history.push_back(kl);

    std::array<double, 2> mean{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      for (int c = 0; c < 2; ++c) {
        const bool same_sign = (grad[i][c] > 0.0) == (update[i][c] > 0.0);
        gains[i][c] = same_sign ? std::max(gains[i][c] * 0.8, 0.01) : gains[i][c] + 0.2;
        update[i][c] = momentum * update[i][c] - cfg.learning_rate * gains[i][c] * grad[i][c];
        y[i][c] += update[i][c];
        mean[c] += y[i][c];
      }
    }
    for (auto& pt : y) {
      pt[0] -= mean[0] / static_cast<double>(n);
      pt[1] -= mean[1] / static_cast<double>(n);
    }
  }

  for (const auto& pt : y) {
    if (!std::isfinite(pt[0]) || !std::isfinite(pt[1])) throw Error(Errc::NonFiniteValue, "t-SNE diverged");
  }
  return out;
}

}  // namespace eventcube
