#include <random>

#include <benchmark/benchmark.h>

#include <eventcube/analyze.hpp>
#include <eventcube/datagen.hpp>
#include <eventcube/embed.hpp>
#include <eventcube/sae.hpp>
#include <eventcube/tensorize.hpp>

namespace {

using namespace eventcube;

const std::vector<EventSeries>& corpus() {
  static const auto series = simulate_dataset(standard_classes(25), 17);
  return series;
}

Eigen::MatrixXd blobs(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double centre = 6.0 * static_cast<double>(i % 4);
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = centre + g(rng);
  }
  return x;
}

void BM_TensorizeCube(benchmark::State& state) {
  const auto& series = corpus();
  const BinningConfig cfg = resolve_bounds(BinningConfig{}, series);
  std::size_t events = 0;
  for (auto _ : state) {
    for (const auto& s : series) {
      benchmark::DoNotOptimize(tensorize(s, cfg));
      events += s.size();
    }
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(events));
}
BENCHMARK(BM_TensorizeCube)->Unit(benchmark::kMillisecond);

void BM_TrainStepDenseCube(benchmark::State& state) {
  using namespace eventcube::sae;
  const auto batch = static_cast<Eigen::Index>(state.range(0));
  ArchSpec arch = ArchSpec::dense_cube();
  arch.input_dims = {24, 16, 16};
  SaeModel model(arch, 3);
  AdamState<float> adam(model.parameters().size());
  Matrix<float> x = Matrix<float>::Random(static_cast<Eigen::Index>(model.input_size()), batch).cwiseAbs();
  for (auto _ : state) {
    auto pass = model.forward(x, Mode::Train);
    const auto lg = loss_gradients(x, pass.reconstruction, pass.latent, 0.1);
    const auto grads = model.backward(pass, lg.d_reconstruction, lg.d_latent);
    adam_step<float>(model.parameters(), grads, adam, 0.001);
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_TrainStepDenseCube)->Arg(64)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_Tsne(benchmark::State& state) {
  LatentMatrix latents;
  latents.values = blobs(static_cast<std::size_t>(state.range(0)), 24, 5);
  for (Eigen::Index i = 0; i < latents.values.rows(); ++i) {
    latents.ids.push_back("s" + std::to_string(i));
    latents.labels.emplace_back();
  }
  TsneConfig cfg;
  cfg.iterations = 300;
  for (auto _ : state) benchmark::DoNotOptimize(tsne_project(latents, cfg));
}
BENCHMARK(BM_Tsne)->Arg(200)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_Dbscan(benchmark::State& state) {
  const auto x = blobs(static_cast<std::size_t>(state.range(0)), 24, 9);
  for (auto _ : state) benchmark::DoNotOptimize(dbscan(x, 4.0, 5));
}
BENCHMARK(BM_Dbscan)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_KDistances(benchmark::State& state) {
  const auto x = blobs(static_cast<std::size_t>(state.range(0)), 24, 11);
  for (auto _ : state) benchmark::DoNotOptimize(k_distances(x, 4));
}
BENCHMARK(BM_KDistances)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
