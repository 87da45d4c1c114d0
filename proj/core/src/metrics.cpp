#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "eventcube/analyze.hpp"
#include "eventcube/error.hpp"

namespace eventcube {

namespace {

template <typename A, typename B>
void check_aligned(std::span<A> a, std::span<B> b) {
  if (a.empty() || b.empty()) throw Error(Errc::EmptyInput, "metrics need at least one value");
  if (a.size() != b.size()) throw Error(Errc::DimMismatch, "predictions and truth differ in length");
}

}  // namespace

ClassificationMetrics classification_metrics(std::span<const int> predicted, std::span<const int> truth) {
  check_aligned(predicted, truth);
  ClassificationMetrics out;
  std::set<int> classes(truth.begin(), truth.end());
  classes.insert(predicted.begin(), predicted.end());
  out.classes.assign(classes.begin(), classes.end());

  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) correct += predicted[i] == truth[i];
  out.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());

  for (int c : out.classes) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const bool p = predicted[i] == c;
      const bool t = truth[i] == c;
      tp += p && t;
      fp += p && !t;
      fn += !p && t;
    }
    const double denom = static_cast<double>(2 * tp + fp + fn);
    out.f1_per_class.push_back(denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0);
  }
  return out;
}

RegressionMetrics regression_metrics(std::span<const double> predicted, std::span<const double> truth) {
  check_aligned(predicted, truth);
  const double n = static_cast<double>(truth.size());
  const double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / n;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ss_res += (truth[i] - predicted[i]) * (truth[i] - predicted[i]);
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
  }
  if (ss_tot == 0.0) throw Error(Errc::ConstantTruth, "R^2 is undefined for constant truth");
  return {1.0 - ss_res / ss_tot, ss_res / n};
}

std::vector<int> threshold_variability(std::span<const double> variability_index) {
  std::vector<int> out;
  out.reserve(variability_index.size());
  for (double v : variability_index) {
    if (!(v >= 0.0 && v <= 10.0)) throw Error(Errc::OutOfRange, "variability index " + std::to_string(v) + " outside [0, 10]");
    out.push_back(v > 6.0 ? 1 : 0);
  }
  return out;
}

HoldoutSplit holdout_split(std::size_t n, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw Error(Errc::InvalidConfig, "test fraction must be in (0, 1)");
  const auto n_test = static_cast<std::size_t>(std::ceil(test_fraction * static_cast<double>(n) - 1e-9));
  if (n < 2 || n_test >= n) throw Error(Errc::TooSmall, "cannot hold out from " + std::to_string(n) + " rows");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  HoldoutSplit out;
  out.test.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
  out.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  return out;
}

}  // namespace eventcube
