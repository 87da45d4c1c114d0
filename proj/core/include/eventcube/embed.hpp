#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "eventcube/ingest.hpp"
#include "eventcube/sae/model.hpp"
#include "eventcube/tensorize.hpp"

namespace eventcube {

/// n x d latent codes, one row per series, with labels joined from the catalog.
struct LatentMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> ids;
  std::vector<SeriesLabels> labels;

  std::size_t rows() const noexcept { return ids.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(values.cols()); }
  /// Throws DimMismatch / DuplicateSeriesId / NonFiniteValue.
  void validate() const;
  /// Row index of `id`; throws UnknownId.
  std::size_t find(const std::string& id) const;
};

/// Encodes every catalog entry; rows follow catalog order. Tensors are
/// looked up by series id in `tensors`.
LatentMatrix extract_latents(const sae::SaeModel& model, const Catalog& catalog, std::span<const Tensor> tensors);

/// Same, reading `<tensor_dir>/<series_id>.etdt` (or `.etmp`). Throws MissingTensor.
LatentMatrix extract_latents(const sae::SaeModel& model, const Catalog& catalog,
                             const std::filesystem::path& tensor_dir);

/// `series_id,z0..z{d-1},variability_index,hardness_ratio,class_tag`.
void write_latents_csv(const LatentMatrix& latents, const std::filesystem::path& path);
LatentMatrix read_latents_csv(const std::filesystem::path& path);

struct Calibration {
  std::vector<double> probabilities;  // conditional p_{j|i}, same order as the input row
  double beta = 1.0;                  // Gaussian precision
  double perplexity = 0.0;            // achieved exp(H) with H in nats
  bool converged = false;
  int iterations = 0;
};

/// Bisection on the precision so that the conditional distribution over the
/// given squared distances (self excluded) reaches the target perplexity
/// within 1e-5 in log space, in at most 50 steps. On failure the best
/// precision seen is kept and `converged` is false.
Calibration perplexity_calibration(std::span<const double> squared_distances, double target_perplexity);

/// Symmetrized joint affinities (p_{j|i} + p_{i|j}) / 2n, row-major n x n.
/// `unconverged_rows` receives the number of rows that fell back.
std::vector<double> joint_probabilities(const Eigen::MatrixXd& points, double perplexity,
                                        std::size_t* unconverged_rows = nullptr);

/// Student-t joint affinities of an n x 2 embedding, row-major n x n.
std::vector<double> student_t_affinities(std::span<const std::array<double, 2>> points);

/// KL(P || Q) over entries with p > 0.
double kl_divergence(std::span<const double> p, std::span<const double> q);

struct TsneConfig {
  double perplexity = 30.0;
  std::size_t iterations = 1000;
  double learning_rate = 200.0;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  std::size_t momentum_switch_iter = 250;
  double early_exaggeration = 12.0;
  std::size_t exaggeration_iters = 250;
  double init_sigma = 1e-4;
  std::uint64_t seed = 0;
};

struct Embedding2D {
  std::vector<std::array<double, 2>> points;
  std::vector<std::string> ids;
  std::vector<SeriesLabels> labels;
  std::vector<double> kl_history;  // KL(P || Q) with the unexaggerated P, one per iteration
  std::vector<std::string> warnings;
};

/// Exact O(n^2) t-SNE. Throws TooFewPoints when n < 5.
Embedding2D tsne_project(const LatentMatrix& latents, const TsneConfig& cfg = {});

/// `series_id,x,y,variability_index,hardness_ratio,class_tag`.
void write_embedding_csv(const Embedding2D& embedding, const std::filesystem::path& path);
Embedding2D read_embedding_csv(const std::filesystem::path& path);

/// Mean silhouette coefficient of integer labels under Euclidean distance.
/// Points whose label has a single member contribute 0.
double silhouette_score(const Eigen::MatrixXd& points, std::span<const int> labels);

}  // namespace eventcube
