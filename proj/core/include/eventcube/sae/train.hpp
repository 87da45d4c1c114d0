#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "eventcube/sae/model.hpp"

namespace eventcube::sae {

struct TrainConfig {
  double lambda = 0.1;
  std::size_t batch_size = 1024;
  std::size_t max_epochs = 200;
  double lr = 0.01;
  double plateau_factor = 10.0;
  std::size_t plateau_patience = 10;     // reduce once more than this many epochs fail to improve
  std::size_t early_stop_patience = 25;  // stop after this many epochs without improvement
  double min_delta = 1e-6;               // improvement means val < best - min_delta
  std::uint64_t seed = 0;

  /// Throws InvalidConfig.
  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  LossValue train;
  LossValue val;
  double lr = 0.0;  // rate used during this epoch
  bool improved = false;
  bool lr_reduced = false;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  bool early_stopped = false;
  std::vector<std::size_t> lr_reductions;  // epochs after which the rate was divided

  double best_val_loss() const;
};

/// Validation-loss bookkeeping shared by the LR scheduler and early stopping.
/// The scheduler counter resets after each reduction; the early-stop
/// counter resets only on improvement.
class PlateauSchedule {
 public:
  explicit PlateauSchedule(const TrainConfig& cfg);

  struct Step {
    bool improved = false;
    bool reduce_lr = false;
    bool stop = false;
  };

  Step observe(double val_loss);
  double lr() const noexcept { return lr_; }
  double best() const noexcept { return best_; }

 private:
  double lr_;
  double factor_;
  double min_delta_;
  std::size_t plateau_patience_;
  std::size_t stop_patience_;
  double best_ = std::numeric_limits<double>::infinity();
  std::size_t plateau_bad_ = 0;
  std::size_t stop_bad_ = 0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

struct TrainResult {
  SaeModel model;  // weights and running stats from the best validation epoch
  AdamState<float> optimizer;
  TrainHistory history;
};

/// Infer-mode loss over a whole matrix, evaluated in chunks.
template <class T>
LossValue evaluate(const Autoencoder<T>& model, const Matrix<T>& data, double lambda, std::size_t chunk = 1024);

/// Minibatch Adam on `train` (one column per sample). Throws EmptySplit,
/// DimMismatch, DivergedLoss.
TrainResult train(const Matrix<float>& train_set, const Matrix<float>& val_set, const ArchSpec& arch,
                  const TrainConfig& cfg, const EpochCallback& on_epoch = {});

}  // namespace eventcube::sae
