#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <eventcube/error.hpp>

#include "commands.hpp"

namespace {

using namespace eventcube;
using namespace eventcube::cli;

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("eventcube");
  logger->set_pattern("[%H:%M:%S] [%^%l%$] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* level = std::getenv("EVENTCUBE_LOG")) {
    const auto parsed = spdlog::level::from_str(level);
    // from_str maps unknown names to off; only honour names it really knows.
    if (parsed != spdlog::level::off || std::string_view(level) == "off") spdlog::set_level(parsed);
  }
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::InvalidConfig:
    case Errc::ShapeInferenceFailure:
      return kUsageError;
    default:
      return kDataError;
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(Errc::InvalidConfig, "not a number list: " + text);
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Representation learning for event time series: simulate, tensorize, train, embed and analyze."};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  CommandInputs in;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--workers", workers, "Worker threads (0 = all cores)");
  app.add_option("--out", in.out, "Run directory")->required();

  // Hyperparameter flags, folded into the configuration after it is loaded.
  std::optional<std::size_t> per_class, epochs, batch_size, min_pts, k, iterations, estimators, max_depth;
  std::optional<double> lambda, lr, perplexity, eps;
  std::string dims, scaling, transform;
  bool raw_latents = false;
  std::string vector_text;

  std::function<void(const RunConfig&)> action;

  auto* gen = app.add_subcommand("gen", "Simulate the four-class synthetic catalog");
  gen->add_option("--per-class", per_class, "Series per class");
  gen->callback([&] { action = [&](const RunConfig& c) { run_gen(c, in); }; });

  auto* tens = app.add_subcommand("tensorize", "Bin every catalog series into a map or cube");
  tens->add_option("--catalog", in.catalog, "catalog.jsonl")->required();
  tens->add_option("--dims", dims, "n_tau,n_eps[,n_dtau]");
  tens->add_option("--scaling", scaling, "raw | unit_sum | log1p");
  tens->add_option("--transform", transform, "log10 | identity");
  tens->callback([&] { action = [&](const RunConfig& c) { run_tensorize(c, in); }; });

  auto* train = app.add_subcommand("train", "Train the sparse autoencoder on a tensor directory");
  train->add_option("--tensors", in.tensors, "Tensor directory")->required();
  train->add_option("--lambda", lambda, "L1 weight on the latent code");
  train->add_option("--lr", lr, "Initial Adam learning rate");
  train->add_option("--epochs", epochs, "Maximum epochs");
  train->add_option("--batch-size", batch_size, "Mini-batch size");
  train->callback([&] { action = [&](const RunConfig& c) { run_train(c, in); }; });

  auto* encode = app.add_subcommand("encode", "Extract latent vectors with a trained encoder");
  encode->add_option("--model", in.model, "Checkpoint")->required();
  encode->add_option("--tensors", in.tensors, "Tensor directory")->required();
  encode->add_option("--catalog", in.catalog, "Catalog supplying order and labels");
  encode->callback([&] { action = [&](const RunConfig& c) { run_encode(c, in); }; });

  auto* project = app.add_subcommand("project", "t-SNE projection of the latent space");
  project->add_option("--latents", in.latents, "latents.csv")->required();
  project->add_option("--perplexity", perplexity, "t-SNE perplexity");
  project->add_option("--iterations", iterations, "t-SNE iterations");
  project->add_option("--color-by", in.color_by, "variability_index | hardness_ratio | class_tag");
  project->callback([&] { action = [&](const RunConfig& c) { run_project(c, in); }; });

  auto* cluster = app.add_subcommand("cluster", "DBSCAN over the latent space");
  cluster->add_option("--latents", in.latents, "latents.csv")->required();
  cluster->add_option("--embedding", in.embedding, "embedding.csv for a coloured scatter");
  cluster->add_option("--eps", eps, "Neighbourhood radius (suggested when omitted)");
  cluster->add_option("--min-pts", min_pts, "Core point threshold");
  cluster->add_flag("--raw", raw_latents, "Cluster the raw codes instead of per-column z-scores");
  cluster->callback([&] { action = [&](const RunConfig& c) { run_cluster(c, in); }; });

  auto* knn = app.add_subcommand("knn", "Nearest neighbours in the latent space");
  knn->add_option("--latents", in.latents, "latents.csv")->required();
  knn->add_option("--id", in.ids, "Query series id (repeatable)");
  knn->add_option("--vector", vector_text, "Query vector, comma separated");
  knn->add_option("-k,--k", k, "Neighbours per query");
  knn->callback([&] { action = [&](const RunConfig& c) { run_knn(c, in); }; });

  auto* score = app.add_subcommand("score", "Mean k-NN distance anomaly scores");
  score->add_option("--latents", in.latents, "latents.csv")->required();
  score->add_option("-k,--k", k, "Neighbours per row");
  score->callback([&] { action = [&](const RunConfig& c) { run_score(c, in); }; });

  auto* head = app.add_subcommand("fit-head", "Gradient-boosted trees on the latent vectors");
  head->add_option("--latents", in.latents, "latents.csv")->required();
  head->add_option("--target", in.target, "variability_index | hardness_ratio");
  head->add_option("--kind", in.kind, "classifier | regressor");
  head->add_option("--n-estimators", estimators, "Boosting rounds");
  head->add_option("--max-depth", max_depth, "Tree depth");
  head->callback([&] { action = [&](const RunConfig& c) { run_fit_head(c, in); }; });

  auto* report = app.add_subcommand("report", "Render SVG figures");
  report->add_option("--events", in.events, "Event CSV for a light curve");
  report->add_option("--tensor", in.tensor, "Tensor drawn next to the light curve");
  report->add_option("--bin", in.bin_seconds, "Light-curve bin width in seconds");
  report->add_option("--embedding", in.embedding, "embedding.csv");
  report->add_option("--color-by", in.color_by, "variability_index | hardness_ratio | class_tag");
  report->add_option("--latents", in.latents, "latents.csv for a k-distance plot");
  report->add_option("--min-pts", min_pts, "k-distance order plus one");
  report->add_flag("--raw", raw_latents, "k-distances of the raw codes instead of per-column z-scores");
  report->callback([&] { action = [&](const RunConfig& c) { run_report(c, in); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;
    if (per_class) cfg.gen.per_class = *per_class;
    if (!dims.empty()) {
      const auto d = parse_list(dims);
      if (d.size() != 2 && d.size() != 3) throw Error(Errc::InvalidConfig, "--dims takes two or three sizes");
      for (double v : d) {
        if (v < 1 || v != static_cast<double>(static_cast<std::uint32_t>(v))) {
          throw Error(Errc::InvalidConfig, "--dims entries must be positive integers");
        }
      }
      cfg.binning.n_tau = static_cast<std::uint32_t>(d[0]);
      cfg.binning.n_eps = static_cast<std::uint32_t>(d[1]);
      cfg.binning.n_dtau = d.size() == 3 ? static_cast<std::uint32_t>(d[2]) : 0;
    }
    if (!scaling.empty()) cfg.binning.scaling = parse_scaling(scaling);
    if (!transform.empty()) cfg.binning.transform = parse_transform(transform);
    if (lambda) cfg.train.lambda = *lambda;
    if (lr) cfg.train.lr = *lr;
    if (epochs) cfg.train.max_epochs = *epochs;
    if (batch_size) cfg.train.batch_size = *batch_size;
    if (perplexity) cfg.tsne.perplexity = *perplexity;
    if (iterations) cfg.tsne.iterations = *iterations;
    if (eps) cfg.cluster.eps = *eps;
    if (min_pts) cfg.cluster.min_pts = *min_pts;
    if (raw_latents) cfg.cluster.standardize = false;
    if (k) {
      cfg.knn_k = *k;
      cfg.score_k = *k;
    }
    if (estimators) cfg.head.model.n_estimators = *estimators;
    if (max_depth) cfg.head.model.max_depth = *max_depth;
    if (!vector_text.empty()) in.vector = parse_list(vector_text);
    cfg.validate();

#ifdef _OPENMP
    if (cfg.workers > 0) omp_set_num_threads(static_cast<int>(cfg.workers));
#endif
    action(cfg);
    return 0;
  } catch (const Error& e) {
    // what() already carries the error name and any line number.
    if (e.series_id().empty()) {
      spdlog::error("{}", e.what());
    } else {
      spdlog::error("series {}: {}", e.series_id(), e.what());
    }
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kDataError;
  }
}
