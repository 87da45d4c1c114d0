#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include <spdlog/spdlog.h>

#include <eventcube/analyze.hpp>
#include <eventcube/datagen.hpp>
#include <eventcube/error.hpp>
#include <eventcube/ingest.hpp>
#include <eventcube/report.hpp>

#include "manifest.hpp"

namespace eventcube::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void usage(const std::string& what) { throw Error(Errc::InvalidConfig, what); }

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

bool is_tensor_file(const fs::path& p) { return p.extension() == ".etdt" || p.extension() == ".etmp"; }

/// Tensor files of a directory in file-name order.
std::vector<fs::path> tensor_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(Errc::IoFailure, "not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && is_tensor_file(e.path())) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

/// Catalog given on the command line, or one entry per tensor file without labels.
Catalog catalog_for(const CommandInputs& in) {
  if (!in.catalog.empty()) return load_catalog(in.catalog);
  Catalog cat;
  for (const auto& f : tensor_files(in.tensors)) cat.entries.push_back({f.stem().string(), f, {}});
  return cat;
}

ValidationPolicy policy_for(const BinningConfig& b) {
  ValidationPolicy p;
  p.require_positive_modality = b.transform == ModalityTransform::Log10;
  p.min_events = b.strict ? 2 : 1;
  return p;
}

json bounds_json(const BinningConfig& b) {
  if (const auto* g = std::get_if<GlobalBounds>(&b.bounds)) return json::array({g->lo, g->hi});
  if (std::holds_alternative<PerSeriesBounds>(b.bounds)) return "per_series";
  return "dataset";
}

std::string history_csv(const sae::TrainHistory& h) {
  std::string s = "epoch,lr,train_total,train_recon,train_l1,val_total,val_recon,val_l1,improved,lr_reduced\n";
  for (const auto& e : h.epochs) {
    s += std::to_string(e.epoch) + "," + fmt_double(e.lr) + "," + fmt_double(e.train.total) + "," +
         fmt_double(e.train.recon) + "," + fmt_double(e.train.l1) + "," + fmt_double(e.val.total) + "," +
         fmt_double(e.val.recon) + "," + fmt_double(e.val.l1) + "," + (e.improved ? "1" : "0") + "," +
         (e.lr_reduced ? "1" : "0") + "\n";
  }
  return s;
}

/// Embedding with only labels filled, enough to validate a colour column
/// before any expensive work.
Embedding2D label_shell(const LatentMatrix& latents) {
  Embedding2D e;
  e.ids = latents.ids;
  e.labels = latents.labels;
  e.points.assign(latents.rows(), {0.0, 0.0});
  return e;
}

std::optional<ColorColumn> colour_for(const Embedding2D& e, const std::string& name) {
  if (!name.empty()) return label_column(e, name);
  const bool tagged = std::any_of(e.labels.begin(), e.labels.end(), [](const SeriesLabels& l) { return l.class_tag.has_value(); });
  if (tagged) return label_column(e, "class_tag");
  return std::nullopt;
}

/// Coordinates DBSCAN and the k-distance plot work in.
Eigen::MatrixXd cluster_space(const LatentMatrix& latents, const RunConfig& cfg) {
  return cfg.cluster.standardize ? standardize_columns(latents.values) : latents.values;
}

}  // namespace

void run_gen(const RunConfig& cfg, const CommandInputs& in) {
  RunRecord rec("gen", in.out, config_to_json(cfg));
  rec.seed("master", cfg.seed);
  const auto cat = generate_dataset(standard_classes(cfg.gen.per_class), in.out, cfg.seed);
  rec.output(in.out / "catalog.jsonl");
  for (const auto& e : cat.entries) rec.output(e.file);
  rec.note("series", cat.size());
  rec.commit();
  spdlog::info("generated {} series under {}", cat.size(), in.out.string());
}

void run_tensorize(const RunConfig& cfg, const CommandInputs& in) {
  if (in.catalog.empty()) usage("tensorize needs --catalog");
  RunRecord rec("tensorize", in.out, config_to_json(cfg));
  rec.input("catalog", in.catalog);
  const auto cat = load_catalog(in.catalog);
  const auto policy = policy_for(cfg.binning);

  std::vector<EventSeries> series;
  series.reserve(cat.size());
  for (const auto& e : cat.entries) series.push_back(load_series(e, policy));
  const BinningConfig resolved = resolve_bounds(cfg.binning, series);

  const fs::path dir = in.out / "tensors";
  fs::create_directories(dir);
  for (const auto& s : series) {
    Tensor t;
    try {
      t = tensorize(s, resolved);
    } catch (const Error& e) {
      throw e.with_series(s.series_id);
    }
    const fs::path path = dir / (s.series_id + std::string(tensor_extension(t)));
    write_tensor(t, path);
    rec.output(path);
  }
  json binning = config_to_json(cfg)["binning"];
  binning["bounds"] = bounds_json(resolved);
  write_json(in.out / "binning.json", binning);
  rec.output(in.out / "binning.json");
  rec.note("tensors", series.size());
  rec.commit();
  spdlog::info("wrote {} tensors to {}", series.size(), dir.string());
}

void run_train(RunConfig cfg, const CommandInputs& in) {
  if (in.tensors.empty()) usage("train needs --tensors");
  const auto files = tensor_files(in.tensors);
  if (files.empty()) throw Error(Errc::EmptySplit, "no tensor files in " + in.tensors.string());

  std::vector<Tensor> tensors;
  tensors.reserve(files.size());
  for (const auto& f : files) tensors.push_back(read_tensor(f));
  const auto dims = tensor_dims(tensors.front());
  cfg.binning.n_tau = dims[0];
  cfg.binning.n_eps = dims[1];
  cfg.binning.n_dtau = dims.size() == 3 ? dims[2] : 0;
  const sae::ArchSpec arch = cfg.resolved_arch();
  cfg.train.seed = cfg.seed;

  RunRecord rec("train", in.out, config_to_json(cfg));
  rec.input("tensors", in.tensors);
  rec.seed("init_and_shuffle", cfg.seed);
  rec.seed("split", cfg.seed);

  const auto split = split_indices(tensors.size(), cfg.seed);
  auto stack = [&](const std::vector<std::size_t>& idx) {
    std::vector<Tensor> part;
    part.reserve(idx.size());
    for (auto i : idx) part.push_back(tensors[i]);
    return sae::stack_tensors(part);
  };
  const auto train_set = stack(split.train), val_set = stack(split.val);
  spdlog::info("training on {} tensors, validating on {}, {} parameters", split.train.size(), split.val.size(),
               sae::SaeModel(arch, cfg.seed).parameters().size());

  const auto result = sae::train(train_set, val_set, arch, cfg.train, [](const sae::EpochRecord& e) {
    spdlog::info("epoch {:3} lr {:.3g} train {:.6g} val {:.6g} (recon {:.6g}, l1 {:.6g}){}", e.epoch, e.lr,
                 e.train.total, e.val.total, e.val.recon, e.val.l1, e.improved ? " *" : "");
  });

  sae::save_checkpoint(result.model, &result.optimizer, &cfg.train, in.out / "model.saec");
  rec.output(in.out / "model.saec");
  write_file(in.out / "history.csv", history_csv(result.history));
  rec.output(in.out / "history.csv");
  std::string split_csv = "series_id,split\n";
  auto list = [&](const std::vector<std::size_t>& idx, const char* name) {
    for (auto i : idx) split_csv += tensor_series_id(tensors[i]) + "," + name + "\n";
  };
  list(split.train, "train");
  list(split.val, "val");
  list(split.test, "test");
  write_file(in.out / "split.csv", split_csv);
  rec.output(in.out / "split.csv");
  rec.note("best_epoch", result.history.best_epoch);
  rec.note("best_val_loss", result.history.best_val_loss());
  rec.note("epochs", result.history.epochs.size());
  rec.commit();
  spdlog::info("best epoch {} of {}, validation loss {:.6g}", result.history.best_epoch,
               result.history.epochs.size(), result.history.best_val_loss());
}

void run_encode(const RunConfig& cfg, const CommandInputs& in) {
  if (in.model.empty() || in.tensors.empty()) usage("encode needs --model and --tensors");
  RunRecord rec("encode", in.out, config_to_json(cfg));
  rec.input("model", in.model);
  rec.input("tensors", in.tensors);
  if (!in.catalog.empty()) rec.input("catalog", in.catalog);
  const auto ck = sae::load_checkpoint(in.model);
  const auto cat = catalog_for(in);
  const auto latents = extract_latents(ck.model, cat, in.tensors);
  write_latents_csv(latents, in.out / "latents.csv");
  rec.output(in.out / "latents.csv");
  rec.note("rows", latents.rows());
  rec.commit();
  spdlog::info("encoded {} series into {} dimensions", latents.rows(), latents.dim());
}

void run_project(const RunConfig& cfg, const CommandInputs& in) {
  if (in.latents.empty()) usage("project needs --latents");
  const auto latents = read_latents_csv(in.latents);
  const auto colour = colour_for(label_shell(latents), in.color_by);

  RunRecord rec("project", in.out, config_to_json(cfg));
  rec.input("latents", in.latents);
  rec.seed("tsne", cfg.seed);
  TsneConfig tcfg = cfg.tsne;
  tcfg.seed = cfg.seed;
  const auto e = tsne_project(latents, tcfg);
  for (const auto& w : e.warnings) spdlog::warn("{}", w);
  write_embedding_csv(e, in.out / "embedding.csv");
  rec.output(in.out / "embedding.csv");
  const auto col = colour ? label_column(e, colour->name) : ColorColumn{};
  render_scatter_svg(e, colour ? &col : nullptr, in.out / "report.svg");
  rec.output(in.out / "report.svg");
  rec.note("final_kl", e.kl_history.empty() ? 0.0 : e.kl_history.back());
  rec.commit();
  spdlog::info("projected {} points, final KL {:.4g}", e.points.size(),
               e.kl_history.empty() ? 0.0 : e.kl_history.back());
}

void run_cluster(const RunConfig& cfg, const CommandInputs& in) {
  if (in.latents.empty()) usage("cluster needs --latents");
  const auto latents = read_latents_csv(in.latents);
  std::optional<Embedding2D> embedding;
  if (!in.embedding.empty()) {
    embedding = read_embedding_csv(in.embedding);
    if (embedding->ids != latents.ids) usage("embedding rows do not match the latents");
  }
  RunRecord rec("cluster", in.out, config_to_json(cfg));
  rec.input("latents", in.latents);
  if (embedding) rec.input("embedding", in.embedding);

  const std::size_t min_pts = cfg.cluster.min_pts;
  const Eigen::MatrixXd points = cluster_space(latents, cfg);
  const auto kd = k_distances(points, std::max<std::size_t>(1, min_pts - 1));
  const double eps = cfg.cluster.eps ? *cfg.cluster.eps : suggest_eps(points, min_pts);
  const auto clusters = dbscan(points, eps, min_pts);

  std::string csv = "series_id,cluster,core\n";
  for (std::size_t i = 0; i < latents.rows(); ++i) {
    csv += latents.ids[i] + "," + std::to_string(clusters.labels[i]) + "," + (clusters.core[i] ? "1" : "0") + "\n";
  }
  write_file(in.out / "clusters.csv", csv);
  rec.output(in.out / "clusters.csv");
  write_file(in.out / "k_distance.svg", k_distance_svg(kd, eps));
  rec.output(in.out / "k_distance.svg");
  if (embedding) {
    const auto col = cluster_column(clusters);
    render_scatter_svg(*embedding, &col, in.out / "clusters.svg");
    rec.output(in.out / "clusters.svg");
  }
  rec.note("eps", eps);
  rec.note("clusters", clusters.cluster_count());
  rec.note("noise", clusters.noise_count());
  rec.commit();
  spdlog::info("eps {:.4g}, min_pts {}: {} clusters, {} noise points", eps, min_pts, clusters.cluster_count(),
               clusters.noise_count());
}

void run_knn(const RunConfig& cfg, const CommandInputs& in) {
  if (in.latents.empty()) usage("knn needs --latents");
  if (in.ids.empty() == in.vector.empty()) usage("knn needs either --id or --vector");
  const auto latents = read_latents_csv(in.latents);
  RunRecord rec("knn", in.out, config_to_json(cfg));
  rec.input("latents", in.latents);

  std::vector<NeighborList> results;
  if (!in.vector.empty()) {
    results.push_back(knn_query(latents, in.vector, cfg.knn_k));
  } else {
    for (const auto& id : in.ids) results.push_back(knn_query(latents, id, cfg.knn_k));
  }
  std::string csv = "query_id,rank,neighbor_id,distance\n";
  for (const auto& r : results) {
    for (std::size_t j = 0; j < r.neighbors.size(); ++j) {
      csv += r.query_id + "," + std::to_string(j + 1) + "," + r.neighbors[j].id + "," +
             fmt_double(r.neighbors[j].distance) + "\n";
    }
  }
  write_file(in.out / "neighbors.csv", csv);
  rec.output(in.out / "neighbors.csv");
  rec.commit();
  for (const auto& r : results) {
    for (const auto& n : r.neighbors) {
      spdlog::info("{} -> {} ({:.4g})", r.query_id.empty() ? "<vector>" : r.query_id, n.id, n.distance);
    }
  }
}

void run_score(const RunConfig& cfg, const CommandInputs& in) {
  if (in.latents.empty()) usage("score needs --latents");
  const auto latents = read_latents_csv(in.latents);
  RunRecord rec("score", in.out, config_to_json(cfg));
  rec.input("latents", in.latents);
  const auto scores = anomaly_scores(latents.values, cfg.score_k);
  std::string csv = "series_id,score\n";
  for (std::size_t i = 0; i < latents.rows(); ++i) csv += latents.ids[i] + "," + fmt_double(scores[i]) + "\n";
  write_file(in.out / "scores.csv", csv);
  rec.output(in.out / "scores.csv");
  rec.commit();
  const auto top = std::max_element(scores.begin(), scores.end()) - scores.begin();
  spdlog::info("scored {} series; highest {} ({:.4g})", latents.rows(), latents.ids[static_cast<std::size_t>(top)],
               scores[static_cast<std::size_t>(top)]);
}

void run_fit_head(const RunConfig& cfg, const CommandInputs& in) {
  if (in.latents.empty()) usage("fit-head needs --latents");
  if (in.target != "variability_index" && in.target != "hardness_ratio") {
    usage("--target must be variability_index or hardness_ratio");
  }
  const HeadKind kind = in.kind.empty()
                            ? (in.target == "variability_index" ? HeadKind::Classifier : HeadKind::Regressor)
                            : parse_head_kind(in.kind);
  if (kind == HeadKind::Classifier && in.target != "variability_index") {
    usage("the classifier head thresholds variability_index");
  }
  const auto latents = read_latents_csv(in.latents);

  std::vector<std::size_t> rows;
  std::vector<double> target;
  for (std::size_t i = 0; i < latents.rows(); ++i) {
    const auto& v = in.target == "variability_index" ? latents.labels[i].variability_index
                                                     : latents.labels[i].hardness_ratio;
    if (!v) continue;
    rows.push_back(i);
    target.push_back(*v);
  }
  if (rows.empty()) throw Error(Errc::EmptyInput, "no rows carry " + in.target);
  if (kind == HeadKind::Classifier) {
    const auto bits = threshold_variability(target);
    target.assign(bits.begin(), bits.end());
  }

  RunRecord rec("fit-head", in.out, config_to_json(cfg));
  rec.input("latents", in.latents);
  rec.seed("holdout", cfg.seed);
  const auto split = holdout_split(rows.size(), cfg.head.test_fraction, cfg.seed);
  auto gather = [&](const std::vector<std::size_t>& idx, Eigen::MatrixXd& x, std::vector<double>& y) {
    x.resize(static_cast<Eigen::Index>(idx.size()), latents.values.cols());
    y.clear();
    for (std::size_t r = 0; r < idx.size(); ++r) {
      x.row(static_cast<Eigen::Index>(r)) = latents.values.row(static_cast<Eigen::Index>(rows[idx[r]]));
      y.push_back(target[idx[r]]);
    }
  };
  Eigen::MatrixXd x_train, x_test;
  std::vector<double> y_train, y_test;
  gather(split.train, x_train, y_train);
  gather(split.test, x_test, y_test);

  HeadConfig hcfg = cfg.head.model;
  hcfg.seed = cfg.seed;
  const auto model = fit_head(x_train, y_train, kind, hcfg);
  const auto pred = predict_head(model, x_test);

  json metrics;
  metrics["kind"] = head_kind_name(kind);
  metrics["target"] = in.target;
  metrics["train_rows"] = split.train.size();
  metrics["test_rows"] = split.test.size();
  if (kind == HeadKind::Classifier) {
    std::vector<int> p, t;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      p.push_back(pred[i] > 0.5 ? 1 : 0);
      t.push_back(static_cast<int>(y_test[i]));
    }
    const auto m = classification_metrics(p, t);
    metrics["accuracy"] = m.accuracy;
    metrics["classes"] = m.classes;
    metrics["f1_per_class"] = m.f1_per_class;
    spdlog::info("test accuracy {:.4f}", m.accuracy);
  } else {
    const auto m = regression_metrics(pred, y_test);
    metrics["r2"] = m.r2;
    metrics["mse"] = m.mse;
    spdlog::info("test R2 {:.4f}, MSE {:.4g}", m.r2, m.mse);
  }

  write_file(in.out / "head.json", head_to_json(model));
  rec.output(in.out / "head.json");
  write_json(in.out / "metrics.json", metrics);
  rec.output(in.out / "metrics.json");
  std::string csv = "series_id,truth,prediction\n";
  for (std::size_t i = 0; i < split.test.size(); ++i) {
    csv += latents.ids[rows[split.test[i]]] + "," + fmt_double(y_test[i]) + "," + fmt_double(pred[i]) + "\n";
  }
  write_file(in.out / "predictions.csv", csv);
  rec.output(in.out / "predictions.csv");
  rec.commit();
}

void run_report(const RunConfig& cfg, const CommandInputs& in) {
  if (in.events.empty() && in.embedding.empty() && in.latents.empty()) {
    usage("report needs --events, --embedding or --latents");
  }
  if (!in.tensor.empty() && in.events.empty()) usage("--tensor is drawn next to --events");
  if (!(in.bin_seconds > 0.0)) usage("--bin must be positive");

  std::optional<Embedding2D> embedding;
  std::optional<ColorColumn> colour;
  if (!in.embedding.empty()) {
    embedding = read_embedding_csv(in.embedding);
    colour = colour_for(*embedding, in.color_by);
  }

  RunRecord rec("report", in.out, config_to_json(cfg));
  if (!in.events.empty()) {
    rec.input("events", in.events);
    const auto series = validate_series(parse_event_csv(in.events), policy_for(cfg.binning));
    std::optional<Tensor> tensor;
    if (!in.tensor.empty()) {
      rec.input("tensor", in.tensor);
      tensor = read_tensor(in.tensor);
    }
    const auto* map = tensor ? std::get_if<MapTensor>(&*tensor) : nullptr;
    render_series_svg(series, in.bin_seconds, map, in.out / "series.svg");
    rec.output(in.out / "series.svg");
    if (const auto* cube = tensor ? std::get_if<CubeTensor>(&*tensor) : nullptr) {
      write_file(in.out / "cube.svg", cube_mosaic_svg(*cube));
      rec.output(in.out / "cube.svg");
    }
  }
  if (embedding) {
    rec.input("embedding", in.embedding);
    render_scatter_svg(*embedding, colour ? &*colour : nullptr, in.out / "scatter.svg");
    rec.output(in.out / "scatter.svg");
  }
  if (!in.latents.empty()) {
    rec.input("latents", in.latents);
    const auto latents = read_latents_csv(in.latents);
    const std::size_t min_pts = cfg.cluster.min_pts;
    const Eigen::MatrixXd points = cluster_space(latents, cfg);
    const auto kd = k_distances(points, std::max<std::size_t>(1, min_pts - 1));
    write_file(in.out / "k_distance.svg", k_distance_svg(kd, suggest_eps(points, min_pts)));
    rec.output(in.out / "k_distance.svg");
  }
  rec.commit();
}

}  // namespace eventcube::cli
