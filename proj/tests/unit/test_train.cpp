#include <doctest.h>

#include <algorithm>
#include <random>

#include <eventcube/datagen.hpp>
#include <eventcube/error.hpp>
#include <eventcube/sae.hpp>
#include <eventcube/tensorize.hpp>

using namespace eventcube;
using namespace eventcube::sae;

namespace {

ArchSpec small_map_arch(bool bn = true) {
  ArchSpec a;
  a.input_dims = {8, 6};
  a.layers = {LayerSpec::flatten(), LayerSpec::dense(16), LayerSpec::dense(4)};
  a.batch_norm = bn;
  return a;
}

Matrix<float> synthetic_maps(std::size_t count, std::uint64_t seed) {
  BinningConfig cfg;
  cfg.n_tau = 8;
  cfg.n_eps = 6;
  cfg.n_dtau = 0;
  auto series = simulate_dataset(standard_classes(count / 4), seed);
  cfg = resolve_bounds(cfg, series);
  std::vector<Tensor> tensors;
  for (const auto& s : series) tensors.push_back(tensorize(s, cfg));
  return stack_tensors(tensors);
}

}  // namespace

TEST_CASE("plateau schedule never reduces while improving") {
  TrainConfig cfg;
  PlateauSchedule s(cfg);
  for (int i = 0; i < 100; ++i) {
    const auto step = s.observe(100.0 - i);
    CHECK(step.improved);
    CHECK_FALSE(step.reduce_lr);
    CHECK_FALSE(step.stop);
  }
  CHECK(s.lr() == cfg.lr);
}

TEST_CASE("plateau schedule on a flat loss") {
  TrainConfig cfg;
  PlateauSchedule s(cfg);
  std::vector<int> reductions;
  int stopped = 0;
  for (int epoch = 1; epoch <= 40 && !stopped; ++epoch) {
    const auto step = s.observe(1.0);
    if (step.reduce_lr) reductions.push_back(epoch);
    if (step.stop) stopped = epoch;
  }
  CHECK(reductions == std::vector<int>{12, 23});
  CHECK(stopped == 26);
  CHECK(s.lr() == doctest::Approx(cfg.lr / 100.0));
}

TEST_CASE("improvement must beat the best by the tolerance") {
  TrainConfig cfg;
  PlateauSchedule s(cfg);
  CHECK(s.observe(1.0).improved);
  CHECK_FALSE(s.observe(1.0 - 5e-7).improved);
  CHECK(s.observe(1.0 - 2e-6).improved);
}

TEST_CASE("train config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.lambda = -1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.plateau_patience = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("default training settings") {
  TrainConfig cfg;
  CHECK(cfg.lambda == 0.1);
  CHECK(cfg.batch_size == 1024);
  CHECK(cfg.max_epochs == 200);
  CHECK(cfg.lr == 0.01);
  CHECK(cfg.plateau_factor == 10.0);
  CHECK(cfg.plateau_patience == 10);
  CHECK(cfg.early_stop_patience == 25);
}

TEST_CASE("empty splits are rejected") {
  const Matrix<float> empty(48, 0), some = Matrix<float>::Ones(48, 4);
  for (const auto* pair : {&empty}) {
    try {
      train(*pair, some, small_map_arch(), TrainConfig{});
      FAIL("expected EmptySplit");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::EmptySplit);
    }
  }
  CHECK_THROWS_AS(train(some, empty, small_map_arch(), TrainConfig{}), Error);
  const Matrix<float> wrong = Matrix<float>::Ones(10, 4);
  CHECK_THROWS_AS(train(wrong, wrong, small_map_arch(), TrainConfig{}), Error);
}

TEST_CASE("training reduces reconstruction error and restores the best epoch") {
  const auto data = synthetic_maps(200, 11);
  const Matrix<float> tr = data.leftCols(160), va = data.rightCols(40);
  TrainConfig cfg;
  cfg.batch_size = 16;
  cfg.max_epochs = 30;
  cfg.seed = 2;
  cfg.lr = 0.001;
  const auto result = train(tr, va, small_map_arch(), cfg);
  const auto& h = result.history;
  REQUIRE(h.epochs.size() >= 2);
  CHECK(h.epochs.back().train.recon < h.epochs.front().train.recon);

  double best = 1e300;
  for (const auto& e : h.epochs) best = std::min(best, e.val.total);
  CHECK(h.best_val_loss() == best);
  CHECK(h.epochs[h.best_epoch - 1].val.total == best);
  const auto restored = evaluate(result.model, va, cfg.lambda);
  CHECK(restored.total == doctest::Approx(best).epsilon(1e-9));

  const auto again = train(tr, va, small_map_arch(), cfg);
  CHECK(std::equal(result.model.parameters().begin(), result.model.parameters().end(),
                   again.model.parameters().begin()));
}

TEST_CASE("train on a frozen model follows the plateau rules") {
  const auto data = synthetic_maps(40, 3);
  TrainConfig cfg;
  cfg.lr = 0.0;
  cfg.batch_size = 8;
  cfg.max_epochs = 100;
  const auto result = train(data.leftCols(32), data.rightCols(8), small_map_arch(false), cfg);
  const auto& h = result.history;
  CHECK(h.best_epoch == 1);
  CHECK(h.lr_reductions == std::vector<std::size_t>{12, 23});
  CHECK(h.early_stopped);
  CHECK(h.epochs.size() == 26);
}

TEST_CASE("callback sees every epoch") {
  const auto data = synthetic_maps(40, 4);
  TrainConfig cfg;
  cfg.batch_size = 8;
  cfg.max_epochs = 3;
  std::vector<std::size_t> seen;
  train(data.leftCols(32), data.rightCols(8), small_map_arch(), cfg,
        [&](const EpochRecord& r) { seen.push_back(r.epoch); });
  CHECK(seen == std::vector<std::size_t>{1, 2, 3});
}
