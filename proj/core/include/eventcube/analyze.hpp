#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "eventcube/embed.hpp"

namespace eventcube {

// ---- clustering ----

struct ClusterLabels {
  std::vector<int> labels;  // -1 is noise, clusters numbered 0..K-1
  std::vector<bool> core;
  double eps = 0.0;
  std::size_t min_pts = 0;

  std::size_t cluster_count() const;
  std::size_t noise_count() const;
};

/// Per-column z-scores (population standard deviation). Constant columns are
/// centred only.
Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& points);

/// DBSCAN under Euclidean distance. A neighbourhood contains every row whose
/// squared distance is <= eps^2, the row itself included. Rows are visited in
/// ascending order and clusters expand breadth-first.
ClusterLabels dbscan(const Eigen::MatrixXd& points, double eps, std::size_t min_pts);

/// Distance from each row to its k-th nearest other row, sorted ascending.
std::vector<double> k_distances(const Eigen::MatrixXd& points, std::size_t k);

/// Knee of the sorted (min_pts - 1)-distance curve: the point farthest from
/// the chord joining its ends. Falls back to the smallest positive distance,
/// then 1.0, when the knee is zero.
double suggest_eps(const Eigen::MatrixXd& points, std::size_t min_pts);

// ---- retrieval ----

struct Neighbor {
  std::size_t row = 0;
  std::string id;
  double distance = 0.0;
};

struct NeighborList {
  std::string query_id;  // empty for vector queries
  std::vector<Neighbor> neighbors;
};

/// k nearest rows to row `id`, itself excluded. Ties go to the lower row.
/// Throws UnknownId, KTooLarge.
NeighborList knn_query(const LatentMatrix& latents, const std::string& id, std::size_t k);

/// k nearest rows to an arbitrary vector. Throws DimMismatch, KTooLarge.
NeighborList knn_query(const LatentMatrix& latents, std::span<const double> query, std::size_t k);

/// Mean distance to the k nearest other rows. Throws KTooLarge.
std::vector<double> anomaly_scores(const Eigen::MatrixXd& points, std::size_t k);

// ---- supervised heads ----

enum class HeadKind { Classifier, Regressor };

std::string_view head_kind_name(HeadKind kind) noexcept;
HeadKind parse_head_kind(std::string_view name);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool leaf() const noexcept { return feature < 0; }
};

/// Rows with x[feature] < threshold go left.
struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(const double* row, Eigen::Index stride) const;
  std::size_t depth() const;
};

struct HeadConfig {
  std::size_t n_estimators = 100;
  std::size_t max_depth = 3;
  double learning_rate = 0.1;
  double min_child_weight = 1.0;  // minimum hessian sum per child
  std::uint64_t seed = 0;

  void validate() const;
};

struct HeadModel {
  HeadKind kind = HeadKind::Regressor;
  std::vector<RegressionTree> trees;
  double learning_rate = 0.1;
  std::size_t n_estimators = 0;
  double base_score = 0.0;
  std::size_t n_features = 0;
};

/// Gradient-boosted trees: squared loss for regression, logistic loss for
/// binary {0,1} classification. Leaf weights are -G/H. When `train_loss` is
/// given it receives the training loss after every round (MSE or log loss).
/// Throws DegenerateLabels, DimMismatch, EmptyInput.
HeadModel fit_head(const Eigen::MatrixXd& features, std::span<const double> labels, HeadKind kind,
                   const HeadConfig& cfg = {}, std::vector<double>* train_loss = nullptr);

/// Raw score for regressors, probability of class 1 for classifiers.
std::vector<double> predict_head(const HeadModel& model, const Eigen::MatrixXd& features);

std::string head_to_json(const HeadModel& model);
/// Throws InvalidConfig on malformed input.
HeadModel head_from_json(std::string_view text);

// ---- metrics ----

struct ClassificationMetrics {
  double accuracy = 0.0;
  std::vector<int> classes;        // sorted union of predicted and true labels
  std::vector<double> f1_per_class;  // aligned with `classes`
};

struct RegressionMetrics {
  double r2 = 0.0;
  double mse = 0.0;
};

/// Throws EmptyInput, DimMismatch.
ClassificationMetrics classification_metrics(std::span<const int> predicted, std::span<const int> truth);

/// Throws EmptyInput, DimMismatch, ConstantTruth.
RegressionMetrics regression_metrics(std::span<const double> predicted, std::span<const double> truth);

/// 1 iff the index exceeds 6. Throws OutOfRange outside [0, 10].
std::vector<int> threshold_variability(std::span<const double> variability_index);

/// Seeded shuffle; the held-out part has ceil(n * test_fraction) rows.
struct HoldoutSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};
HoldoutSplit holdout_split(std::size_t n, double test_fraction, std::uint64_t seed);

}  // namespace eventcube
