#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "eventcube/error.hpp"
#include "eventcube/sae/train.hpp"

namespace eventcube::sae {

void TrainConfig::validate() const {
  if (!(lambda >= 0.0)) throw Error(Errc::InvalidConfig, "lambda must be >= 0");
  if (batch_size < 1) throw Error(Errc::InvalidConfig, "batch_size must be >= 1");
  if (max_epochs < 1) throw Error(Errc::InvalidConfig, "max_epochs must be >= 1");
  if (!(lr >= 0.0)) throw Error(Errc::InvalidConfig, "lr must be >= 0");
  if (!(plateau_factor >= 1.0)) throw Error(Errc::InvalidConfig, "plateau_factor must be >= 1");
  if (plateau_patience < 1 || early_stop_patience < 1) {
    throw Error(Errc::InvalidConfig, "patience values must be >= 1");
  }
  if (!(min_delta >= 0.0)) throw Error(Errc::InvalidConfig, "min_delta must be >= 0");
}

double TrainHistory::best_val_loss() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : epochs) best = std::min(best, e.val.total);
  return best;
}

PlateauSchedule::PlateauSchedule(const TrainConfig& cfg)
    : lr_(cfg.lr),
      factor_(cfg.plateau_factor),
      min_delta_(cfg.min_delta),
      plateau_patience_(cfg.plateau_patience),
      stop_patience_(cfg.early_stop_patience) {}

PlateauSchedule::Step PlateauSchedule::observe(double val_loss) {
  Step step;
  if (val_loss < best_ - min_delta_) {
    best_ = val_loss;
    plateau_bad_ = 0;
    stop_bad_ = 0;
    step.improved = true;
    return step;
  }
  ++plateau_bad_;
  ++stop_bad_;
  if (plateau_bad_ > plateau_patience_) {
    lr_ /= factor_;
    plateau_bad_ = 0;
    step.reduce_lr = true;
  }
  step.stop = stop_bad_ >= stop_patience_;
  return step;
}

template <class T>
LossValue evaluate(const Autoencoder<T>& model, const Matrix<T>& data, double lambda, std::size_t chunk) {
  LossValue total;
  const auto n = data.cols();
  if (n == 0) return total;
  chunk = std::max<std::size_t>(chunk, 1);
  for (Eigen::Index start = 0; start < n; start += static_cast<Eigen::Index>(chunk)) {
    const Eigen::Index len = std::min<Eigen::Index>(static_cast<Eigen::Index>(chunk), n - start);
    const Matrix<T> x = data.middleCols(start, len);
    const ForwardPass<T> pass = model.infer(x);
    const LossValue lv = loss(x, pass.reconstruction, pass.latent, lambda);
    const double w = static_cast<double>(len);
    total.recon += lv.recon * w;
    total.l1 += lv.l1 * w;
  }
  total.recon /= static_cast<double>(n);
  total.l1 /= static_cast<double>(n);
  total.total = total.recon + lambda * total.l1;
  return total;
}

template LossValue evaluate<float>(const Autoencoder<float>&, const Matrix<float>&, double, std::size_t);
template LossValue evaluate<double>(const Autoencoder<double>&, const Matrix<double>&, double, std::size_t);

TrainResult train(const Matrix<float>& train_set, const Matrix<float>& val_set, const ArchSpec& arch,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_set.cols() == 0) throw Error(Errc::EmptySplit, "training split is empty");
  if (val_set.cols() == 0) throw Error(Errc::EmptySplit, "validation split is empty");

  TrainResult result{SaeModel(arch, cfg.seed), AdamState<float>(), {}};
  SaeModel& model = result.model;
  if (static_cast<std::size_t>(train_set.rows()) != model.input_size() ||
      static_cast<std::size_t>(val_set.rows()) != model.input_size()) {
    throw Error(Errc::DimMismatch, "dataset rows do not match the architecture input");
  }
  result.optimizer = AdamState<float>(model.parameters().size());
  AdamState<float>& opt = result.optimizer;

  PlateauSchedule schedule(cfg);
  double lr = cfg.lr;
  std::vector<float> best_params(model.parameters().begin(), model.parameters().end());
  std::vector<float> best_stats(model.running_stats().begin(), model.running_stats().end());
  AdamState<float> best_opt = opt;

  const auto n = static_cast<std::size_t>(train_set.cols());
  const std::size_t batch = std::min(cfg.batch_size, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(cfg.seed ^ 0x5deece66dULL);

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;

    std::size_t seen = 0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t len = std::min(batch, n - start);
      // A trailing single sample gives degenerate batch statistics.
      if (len == 1 && n > 1) break;
      Matrix<float> x(train_set.rows(), static_cast<Eigen::Index>(len));
      for (std::size_t j = 0; j < len; ++j) x.col(static_cast<Eigen::Index>(j)) = train_set.col(static_cast<Eigen::Index>(order[start + j]));

      const ForwardPass<float> pass = model.forward(x, Mode::Train);
      const LossValue lv = loss(x, pass.reconstruction, pass.latent, cfg.lambda);
      if (!std::isfinite(lv.total)) {
        throw Error(Errc::DivergedLoss, "non-finite training loss at epoch " + std::to_string(epoch));
      }
      const LossGradients<float> lg = loss_gradients(x, pass.reconstruction, pass.latent, cfg.lambda);
      const AlignedVector<float> grads = model.backward(pass, lg.d_reconstruction, lg.d_latent);
      adam_step<float>(model.parameters(), grads, opt, lr);

      const double w = static_cast<double>(len);
      rec.train.total += lv.total * w;
      rec.train.recon += lv.recon * w;
      rec.train.l1 += lv.l1 * w;
      seen += len;
    }
    if (seen > 0) {
      rec.train.total /= static_cast<double>(seen);
      rec.train.recon /= static_cast<double>(seen);
      rec.train.l1 /= static_cast<double>(seen);
    }

    rec.val = evaluate(model, val_set, cfg.lambda, std::max<std::size_t>(cfg.batch_size, 256));
    if (!std::isfinite(rec.val.total)) {
      throw Error(Errc::DivergedLoss, "non-finite validation loss at epoch " + std::to_string(epoch));
    }

    const PlateauSchedule::Step step = schedule.observe(rec.val.total);
    rec.improved = step.improved;
    rec.lr_reduced = step.reduce_lr;
    if (step.improved) {
      std::copy(model.parameters().begin(), model.parameters().end(), best_params.begin());
      std::copy(model.running_stats().begin(), model.running_stats().end(), best_stats.begin());
      best_opt = opt;
      result.history.best_epoch = epoch;
    }
    if (step.reduce_lr) {
      lr = schedule.lr();
      result.history.lr_reductions.push_back(epoch);
    }
    result.history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (step.stop) {
      result.history.early_stopped = true;
      break;
    }
  }

  std::copy(best_params.begin(), best_params.end(), model.parameters().begin());
  std::copy(best_stats.begin(), best_stats.end(), model.running_stats().begin());
  opt = std::move(best_opt);
  return result;
}

}  // namespace eventcube::sae
