// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the process exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <eventcube/analyze.hpp>
#include <eventcube/datagen.hpp>
#include <eventcube/embed.hpp>
#include <eventcube/error.hpp>
#include <eventcube/ingest.hpp>
#include <eventcube/sae.hpp>
#include <eventcube/tensorize.hpp>

#include "test_support.hpp"

using namespace eventcube;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail << "failed: " << what << "; ";
    }
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

/// Runs `body`, enforces the runtime limit and prints the verdict line.
double run_criterion(int id, const std::string& name, double limit_s, const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto t0 = Clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.ok = false;
    out.detail << "exception: " << e.what() << "; ";
  }
  const double elapsed = seconds_since(t0);
  if (limit_s > 0 && elapsed > limit_s) {
    out.ok = false;
    out.detail << "runtime " << elapsed << " s over the " << limit_s << " s limit; ";
  }
  std::printf("criterion %2d %s: %s (%.1f s) %s\n", id, out.ok ? "PASS" : "FAIL", name.c_str(), elapsed,
              out.detail.str().c_str());
  std::fflush(stdout);
  if (!out.ok) ++failures;
  return elapsed;
}

// ---- 1: tensorization oracle ----

void tensor_oracle(Outcome& out) {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::uint32_t> dim(1, 8), dtau(0, 8);
  std::uniform_int_distribution<std::size_t> events(2, 300);
  std::uniform_real_distribution<double> lo(2.0, 3.0), width(0.2, 1.5);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto s = testsupport::random_series(rng, events(rng), "t" + std::to_string(trial));
    BinningConfig cfg;
    cfg.n_tau = dim(rng);
    cfg.n_eps = dim(rng);
    cfg.n_dtau = dtau(rng);
    cfg.scaling = CountScaling::Raw;
    const bool global = trial % 2 == 0;
    const double l = lo(rng), h = l + width(rng);
    cfg.bounds = global ? ModalityBounds{GlobalBounds{l, h}} : ModalityBounds{PerSeriesBounds{}};
    const auto ns = normalize_series(s, cfg);
    const auto t = cfg.is_map() ? Tensor{bin_map(ns, cfg)} : Tensor{bin_cube(ns, cfg)};
    const auto values = tensor_values(t);
    const auto oracle = testsupport::brute_force_counts(s, cfg.n_tau, cfg.n_eps, cfg.n_dtau, true, l, h, !global);
    if (!std::equal(values.begin(), values.end(), oracle.begin(), oracle.end())) ++mismatches;
    double total = 0;
    for (double v : values) total += v;
    out.require(total == static_cast<double>(s.size()), "raw cell sum differs from the event count");
  }
  out.require(mismatches == 0, std::to_string(mismatches) + " tensors differ from the brute-force histogram");
  out.detail << "500 series, " << mismatches << " mismatches";
}

// ---- 2: affine-time invariance ----

/// Distance from x to the nearest interior bin edge i/n.
double edge_distance(double x, std::uint32_t n) {
  double best = 1.0;
  for (std::uint32_t i = 1; i < n; ++i) best = std::min(best, std::abs(x - static_cast<double>(i) / n));
  return best;
}

void affine_invariance(Outcome& out) {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<std::uint32_t> dim(1, 8);
  std::uniform_int_distribution<std::size_t> events(2, 200);
  std::uniform_real_distribution<double> scale(0.1, 10.0), shift(-1e3, 1e3);
  constexpr double kMargin = 1e-7;
  std::size_t mismatches = 0, resampled = 0;
  for (int trial = 0; trial < 200; ++trial) {
    BinningConfig cfg;
    cfg.n_tau = dim(rng);
    cfg.n_eps = dim(rng);
    cfg.n_dtau = dim(rng);
    cfg.scaling = CountScaling::Raw;
    cfg.bounds = PerSeriesBounds{};
    // Redraw until no normalized coordinate sits within the margin of an
    // interior edge, so rounding in the affine map cannot move a bin.
    EventSeries s;
    for (;;) {
      s = testsupport::random_series(rng, events(rng), "a" + std::to_string(trial));
      const auto ns = normalize_series(s, cfg);
      bool clear = true;
      for (std::size_t k = 0; k < ns.size() && clear; ++k) {
        clear = edge_distance(ns.tau[k], cfg.n_tau) > kMargin && edge_distance(ns.dtau[k], cfg.n_dtau) > kMargin;
      }
      if (clear) break;
      ++resampled;
    }
    auto moved = s;
    const double a = scale(rng), b = shift(rng);
    for (double& t : moved.time) t = a * t + b;
    if (tensorize(s, cfg) != tensorize(moved, cfg)) ++mismatches;
  }
  out.require(mismatches == 0, std::to_string(mismatches) + " tensors changed under an affine time map");
  out.detail << "200 series, " << resampled << " redrawn near edges, " << mismatches << " mismatches";
}

// ---- 3: gradient check ----

void gradient_checks(Outcome& out) {
  std::mt19937_64 rng(303);
  double worst = 0.0;
  std::string worst_where;
  for (int i = 0; i < 20; ++i) {
    const bool conv = i % 2 == 1, bn = (i / 2) % 2 == 1;
    const double lambda = (i / 4) % 2 == 1 ? 0.1 : 0.0;
    const auto arch = testsupport::random_small_arch(rng, conv, bn);
    const auto r = testsupport::gradient_check(arch, lambda, 1000 + static_cast<std::uint64_t>(i));
    if (r.max_rel_error > worst) {
      worst = r.max_rel_error;
      worst_where = "arch " + std::to_string(i) + " " + r.worst;
    }
  }
  out.require(worst < 1e-4, "max relative error " + std::to_string(worst));
  out.detail << "max relative error " << worst << (worst_where.empty() ? "" : " at " + worst_where);
}

// ---- 4 and 5: training on synthetic cubes ----

struct CubeData {
  sae::Matrix<float> train, val;
};

CubeData synthetic_cubes(std::size_t per_class, std::uint64_t seed) {
  auto series = simulate_dataset(standard_classes(per_class), seed);
  BinningConfig cfg;  // 24 x 16 x 16, log10 energies, dataset bounds, unit-sum counts
  cfg = resolve_bounds(cfg, series);
  std::vector<Tensor> tensors;
  tensors.reserve(series.size());
  for (const auto& s : series) tensors.push_back(tensorize(s, cfg));
  const auto split = split_indices(series.size(), seed);
  auto stack = [&](const std::vector<std::size_t>& idx) {
    std::vector<Tensor> part;
    for (auto i : idx) part.push_back(tensors[i]);
    return sae::stack_tensors(part);
  };
  return {stack(split.train), stack(split.val)};
}

/// Optimizer settings for the small dataset: batch 64 and Adam at 1e-3
/// with the default plateau and early-stop patience.
sae::TrainConfig scaled_protocol(double lambda, std::size_t epochs) {
  sae::TrainConfig cfg;
  cfg.lambda = lambda;
  cfg.batch_size = 64;
  cfg.lr = 0.001;
  cfg.max_epochs = epochs;
  cfg.seed = 404;
  return cfg;
}

std::optional<sae::TrainResult> sparse_result;
std::optional<CubeData> cube_data;

void training_smoke(Outcome& out) {
  cube_data = synthetic_cubes(500, 404);
  const auto& d = *cube_data;
  out.require(d.train.cols() + d.val.cols() == 1800, "unexpected split sizes");

  const auto cfg = scaled_protocol(0.1, 40);
  std::vector<sae::EpochRecord> seen;
  sparse_result = sae::train(d.train, d.val, sae::ArchSpec::dense_cube(), cfg,
                             [&](const sae::EpochRecord& r) { seen.push_back(r); });
  const auto& h = sparse_result->history;
  const double first = h.epochs.front().val.recon;
  const auto best = sae::evaluate(sparse_result->model, d.val, cfg.lambda);
  out.require(best.recon < 0.5 * first, "validation reconstruction did not halve");

  double min_total = 1e300;
  std::size_t argmin = 0;
  for (const auto& e : h.epochs) {
    if (e.val.total < min_total) {
      min_total = e.val.total;
      argmin = e.epoch;
    }
  }
  out.require(h.best_epoch == argmin, "restored epoch is not the validation argmin");
  out.require(std::abs(best.total - min_total) <= 1e-9 * std::max(1.0, min_total),
              "restored weights do not reproduce the best validation loss");
  out.require(seen.size() == h.epochs.size(), "callback missed epochs");

  // Crafted plateau: five improving epochs, then a flat loss. A reduction
  // fires once more than 10 epochs pass without improvement (then the
  // counter restarts) and training stops after 25 epochs without one.
  sae::TrainConfig rules;
  sae::PlateauSchedule schedule(rules);
  std::vector<std::size_t> reductions;
  std::size_t stop = 0;
  for (std::size_t epoch = 1; epoch <= 100 && stop == 0; ++epoch) {
    const auto step = schedule.observe(epoch <= 5 ? 10.0 - static_cast<double>(epoch) : 5.0);
    if (step.reduce_lr) reductions.push_back(epoch);
    if (step.stop) stop = epoch;
  }
  out.require(reductions == std::vector<std::size_t>{5 + 11, 5 + 22}, "schedule reductions off");
  out.require(stop == 5 + 25, "early stop epoch off");
  out.require(std::abs(schedule.lr() - rules.lr / 100.0) <= 1e-15, "learning rate not divided twice");

  // The same rules inside the training loop: a frozen model never improves after epoch 1.
  sae::ArchSpec small;
  small.input_dims = {24, 16, 16};
  small.layers = {sae::LayerSpec::flatten(), sae::LayerSpec::dense(8), sae::LayerSpec::dense(4)};
  small.batch_norm = false;
  sae::TrainConfig frozen = scaled_protocol(0.1, 200);
  frozen.lr = 0.0;
  const auto fr = sae::train(d.train.leftCols(128), d.val.leftCols(64), small, frozen);
  out.require(fr.history.best_epoch == 1, "frozen model best epoch");
  out.require(fr.history.lr_reductions == std::vector<std::size_t>{12, 23}, "frozen model reductions");
  out.require(fr.history.early_stopped && fr.history.epochs.size() == 26, "frozen model early stop");

  out.detail << "val recon epoch 1 " << first << " -> best " << best.recon << " (epoch " << h.best_epoch << " of "
             << h.epochs.size() << ")";
}

double mean_val_l1(const sae::SaeModel& model, const sae::Matrix<float>& val) {
  const auto z = model.encode(val);
  return static_cast<double>(z.cwiseAbs().sum()) / static_cast<double>(val.cols());
}

void sparsity_effect(Outcome& out) {
  out.require(sparse_result.has_value() && cube_data.has_value(), "the sparse run did not complete");
  if (!out.ok) return;
  const auto& d = *cube_data;
  const auto dense = sae::train(d.train, d.val, sae::ArchSpec::dense_cube(), scaled_protocol(0.0, 40));
  const double l1_sparse = mean_val_l1(sparse_result->model, d.val);
  const double l1_dense = mean_val_l1(dense.model, d.val);
  out.require(l1_sparse < l1_dense, "L1 penalty did not shrink the code");
  out.detail << "mean |z|_1 on validation: lambda 0.1 -> " << l1_sparse << ", lambda 0 -> " << l1_dense;
}

// ---- 6: latent semantics ----

void latent_semantics(Outcome& out) {
  auto series = simulate_dataset(standard_classes(250), 606);
  BinningConfig bcfg;
  bcfg = resolve_bounds(bcfg, series);
  std::vector<Tensor> tensors;
  for (const auto& s : series) tensors.push_back(tensorize(s, bcfg));
  const auto split = split_indices(series.size(), 606);
  auto stack = [&](const std::vector<std::size_t>& idx) {
    std::vector<Tensor> part;
    for (auto i : idx) part.push_back(tensors[i]);
    return sae::stack_tensors(part);
  };
  auto cfg = scaled_protocol(0.1, 30);
  cfg.seed = 606;
  const auto result = sae::train(stack(split.train), stack(split.val), sae::ArchSpec::dense_cube(), cfg);

  Catalog cat;
  for (const auto& s : series) cat.entries.push_back({s.series_id, {}, s.labels});
  const auto latents = extract_latents(result.model, cat, tensors);

  std::map<std::string, std::pair<std::size_t, std::size_t>> agree;
  for (std::size_t i = 0; i < latents.rows(); ++i) {
    const auto& tag = *latents.labels[i].class_tag;
    for (const auto& nb : knn_query(latents, latents.ids[i], 3).neighbors) {
      agree[tag].second++;
      if (*latents.labels[nb.row].class_tag == tag) agree[tag].first++;
    }
  }
  for (const char* tag : {"flare", "dip", "pulsating"}) {
    const auto [hit, total] = agree[tag];
    const double rate = total ? static_cast<double>(hit) / static_cast<double>(total) : 0.0;
    out.require(rate >= 0.7, std::string("3-NN consistency for ") + tag);
    out.detail << tag << " 3-NN " << rate << ", ";
  }

  constexpr std::size_t kMinPts = 5;
  const Eigen::MatrixXd points = standardize_columns(latents.values);
  const double eps = suggest_eps(points, kMinPts);
  const auto clusters = dbscan(points, eps, kMinPts);
  double best_purity = 0.0;
  std::size_t best_size = 0;
  for (std::size_t c = 0; c < clusters.cluster_count(); ++c) {
    std::size_t flares = 0, size = 0;
    for (std::size_t i = 0; i < latents.rows(); ++i) {
      if (clusters.labels[i] != static_cast<int>(c)) continue;
      ++size;
      flares += *latents.labels[i].class_tag == "flare";
    }
    const double purity = static_cast<double>(flares) / static_cast<double>(size);
    // Only clusters holding at least a tenth of the flares count.
    if (flares >= 25 && purity > best_purity) {
      best_purity = purity;
      best_size = size;
    }
  }
  out.require(best_purity >= 0.8, "no flare cluster with 80% purity");
  out.detail << "eps " << eps << ", " << clusters.cluster_count() << " clusters, " << clusters.noise_count()
             << " noise, best flare cluster purity " << best_purity << " (" << best_size << " members)";
}

// ---- 7: DBSCAN and kNN oracles ----

void neighbour_oracles(Outcome& out) {
  std::mt19937_64 rng(707);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<Eigen::Index> rows(2, 200), dims(1, 8);
  std::uniform_real_distribution<double> eps(0.2, 2.0);
  std::uniform_int_distribution<std::size_t> mp(1, 10);
  std::size_t bad_dbscan = 0, bad_knn = 0;
  for (int trial = 0; trial < 300; ++trial) {
    Eigen::MatrixXd x(rows(rng), dims(rng));
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
    if (trial % 2 == 0) {
      const double e = eps(rng);
      const std::size_t m = mp(rng);
      if (dbscan(x, e, m).labels != testsupport::dbscan_oracle(x, e, m)) ++bad_dbscan;
      continue;
    }
    LatentMatrix lm;
    lm.values = x;
    for (Eigen::Index i = 0; i < x.rows(); ++i) lm.ids.push_back("r" + std::to_string(i));
    lm.labels.resize(static_cast<std::size_t>(x.rows()));
    const std::size_t k = std::min<std::size_t>(10, static_cast<std::size_t>(x.rows()) - 1);
    const Eigen::Index q = std::uniform_int_distribution<Eigen::Index>(0, x.rows() - 1)(rng);
    const auto got = knn_query(lm, lm.ids[static_cast<std::size_t>(q)], k);
    const auto want = testsupport::knn_oracle(x, x.row(q).transpose(), k, static_cast<long>(q));
    bool same = got.neighbors.size() == want.size();
    for (std::size_t j = 0; same && j < want.size(); ++j) {
      same = got.neighbors[j].row == want[j].second &&
             std::abs(got.neighbors[j].distance - want[j].first) <= 1e-12 * std::max(1.0, want[j].first);
    }
    if (!same) ++bad_knn;
  }
  out.require(bad_dbscan == 0, std::to_string(bad_dbscan) + " DBSCAN partitions differ");
  out.require(bad_knn == 0, std::to_string(bad_knn) + " neighbour lists differ");
  out.detail << "300 instances, " << bad_dbscan << " DBSCAN and " << bad_knn << " kNN mismatches";
}

// ---- 8: t-SNE ----

void tsne_sanity(Outcome& out) {
  std::mt19937_64 rng(808);
  std::normal_distribution<double> g;
  LatentMatrix lm;
  lm.values.resize(120, 12);
  std::vector<int> truth;
  for (Eigen::Index i = 0; i < 120; ++i) {
    for (Eigen::Index k = 0; k < 12; ++k) lm.values(i, k) = g(rng) + (i >= 60 && k < 3 ? 10.0 : 0.0);
    lm.ids.push_back("b" + std::to_string(i));
    truth.push_back(i >= 60);
  }
  lm.labels.resize(120);
  TsneConfig cfg;
  cfg.seed = 808;
  const auto e = tsne_project(lm, cfg);

  Eigen::MatrixXd y(120, 2);
  for (Eigen::Index i = 0; i < 120; ++i) {
    y(i, 0) = e.points[static_cast<std::size_t>(i)][0];
    y(i, 1) = e.points[static_cast<std::size_t>(i)][1];
  }
  const double sil = silhouette_score(y, truth);
  out.require(sil > 0.5, "silhouette " + std::to_string(sil));
  const double post = e.kl_history[cfg.exaggeration_iters - 1];
  out.require(e.kl_history.back() <= post, "final KL above the post-exaggeration KL");

  const auto p = joint_probabilities(lm.values, cfg.perplexity);
  const auto q = student_t_affinities(e.points);
  double max_asym = 0.0, sum_p = 0.0, sum_q = 0.0;
  const std::size_t n = 120;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      sum_p += p[i * n + j];
      sum_q += q[i * n + j];
      max_asym = std::max({max_asym, std::abs(p[i * n + j] - p[j * n + i]), std::abs(q[i * n + j] - q[j * n + i])});
    }
    out.require(p[i * n + i] == 0.0 && q[i * n + i] == 0.0, "non-zero diagonal");
  }
  out.require(std::abs(sum_p - 1.0) <= 1e-9 && std::abs(sum_q - 1.0) <= 1e-9, "affinities do not sum to 1");
  out.require(max_asym <= 1e-9, "affinities not symmetric");
  out.detail << "silhouette " << sil << ", KL " << post << " -> " << e.kl_history.back() << ", |sum P - 1| "
             << std::abs(sum_p - 1.0);
}

// ---- 9: head models ----

void head_models(Outcome& out) {
  std::mt19937_64 rng(909);
  std::normal_distribution<double> g;
  constexpr Eigen::Index n = 1000, d = 24;
  Eigen::MatrixXd z(n, d);
  std::vector<double> vi(n), hr(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) z(i, k) = g(rng);
    const double signal = 2.0 * z(i, 0) + z(i, 1);
    vi[static_cast<std::size_t>(i)] = std::clamp(10.0 / (1.0 + std::exp(-signal)) + 0.3 * g(rng), 0.0, 10.0);
    hr[static_cast<std::size_t>(i)] = std::clamp(std::tanh(0.8 * z(i, 2) - 0.5 * z(i, 3)) + 0.05 * g(rng), -1.0, 1.0);
  }
  const auto variable = threshold_variability(vi);
  const auto split = holdout_split(static_cast<std::size_t>(n), 0.2, 909);
  auto rows_of = [&](const std::vector<std::size_t>& idx) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(idx.size()), d);
    for (std::size_t r = 0; r < idx.size(); ++r) m.row(static_cast<Eigen::Index>(r)) = z.row(static_cast<Eigen::Index>(idx[r]));
    return m;
  };
  const auto x_train = rows_of(split.train), x_test = rows_of(split.test);
  std::vector<double> cls_train, hr_train, hr_test;
  std::vector<int> cls_test;
  for (auto i : split.train) {
    cls_train.push_back(variable[i]);
    hr_train.push_back(hr[i]);
  }
  for (auto i : split.test) {
    cls_test.push_back(variable[i]);
    hr_test.push_back(hr[i]);
  }

  HeadConfig cfg;  // 100 estimators, defaults
  const auto clf = fit_head(x_train, cls_train, HeadKind::Classifier, cfg);
  std::vector<int> predicted;
  for (double p : predict_head(clf, x_test)) predicted.push_back(p > 0.5 ? 1 : 0);
  const auto cm = classification_metrics(predicted, cls_test);
  out.require(cm.accuracy >= 0.9, "classifier accuracy " + std::to_string(cm.accuracy));

  std::vector<double> losses;
  const auto reg = fit_head(x_train, hr_train, HeadKind::Regressor, cfg, &losses);
  const auto rm = regression_metrics(predict_head(reg, x_test), hr_test);
  out.require(rm.r2 >= 0.7, "regressor R2 " + std::to_string(rm.r2));
  bool monotone = losses.size() == cfg.n_estimators;
  for (std::size_t r = 1; monotone && r < losses.size(); ++r) monotone = losses[r] <= losses[r - 1];
  out.require(monotone, "training MSE increased between rounds");
  out.detail << "accuracy " << cm.accuracy << ", R2 " << rm.r2 << ", MSE " << rm.mse << ", train MSE "
             << losses.front() << " -> " << losses.back();
}

// ---- 10: format round trips ----

void round_trips(Outcome& out) {
  testsupport::TempDir dir("acceptance");
  std::mt19937_64 rng(1010);
  for (int i = 0; i < 20; ++i) {
    const auto s = testsupport::random_series(rng, 50 + 10 * static_cast<std::size_t>(i), "rt" + std::to_string(i));
    BinningConfig cfg;
    cfg.n_dtau = i % 2 ? 0 : 16;
    cfg.bounds = PerSeriesBounds{};
    cfg.scaling = CountScaling::Raw;
    const auto t = tensorize(s, cfg);
    const auto path = dir / (s.series_id + std::string(tensor_extension(t)));
    write_tensor(t, path);
    const auto back = read_tensor(path);
    out.require(back == t, "tensor changed through a file");
    out.require(encode_tensor(back) == encode_tensor(t), "tensor bytes changed");
  }

  sae::ArchSpec arch;
  arch.input_dims = {24, 16};
  arch.layers = {sae::LayerSpec::conv2d(4, 3, 3, 1), sae::LayerSpec::flatten(), sae::LayerSpec::dense(16),
                 sae::LayerSpec::dense(6)};
  sae::SaeModel model(arch, 1010);
  sae::AdamState<float> opt(model.parameters().size());
  for (std::size_t i = 0; i < opt.m.size(); ++i) {
    opt.m[i] = static_cast<float>(i % 7) * 0.25f;
    opt.v[i] = static_cast<float>(i % 5) * 0.5f;
  }
  opt.step = 17;
  sae::TrainConfig tcfg;
  save_checkpoint(model, &opt, &tcfg, dir / "model.saec");
  const auto ck = sae::load_checkpoint(dir / "model.saec");
  out.require(std::equal(model.parameters().begin(), model.parameters().end(), ck.model.parameters().begin(),
                         ck.model.parameters().end()),
              "checkpoint parameters changed");
  out.require(ck.optimizer && ck.optimizer->m == opt.m && ck.optimizer->v == opt.v && ck.optimizer->step == 17,
              "optimizer state changed");
  out.require(sae::encode_checkpoint(ck.model, &*ck.optimizer, &*ck.train_config) ==
                  sae::encode_checkpoint(model, &opt, &tcfg),
              "checkpoint bytes changed");

  const auto sizes = split_sizes(95473);
  out.require(sizes.train == 68740 && sizes.val == 17185 && sizes.test == 9548, "split arithmetic");
  out.detail << "95473 -> " << sizes.train << "/" << sizes.val << "/" << sizes.test;
}

}  // namespace

int main() {
  run_criterion(1, "tensorization matches brute-force binning", 10, tensor_oracle);
  run_criterion(2, "tensors invariant to affine time maps", 5, affine_invariance);
  run_criterion(3, "backprop matches finite differences", 60, gradient_checks);
  const double t4 = run_criterion(4, "training smoke on 2000 synthetic cubes", 600, training_smoke);
  run_criterion(5, "L1 penalty shrinks the latent code", 1200 - t4, sparsity_effect);
  run_criterion(6, "latent space separates source classes", 900, latent_semantics);
  run_criterion(7, "DBSCAN and kNN match brute force", 10, neighbour_oracles);
  run_criterion(8, "t-SNE separates blobs and keeps invariants", 60, tsne_sanity);
  run_criterion(9, "boosted heads recover planted signal", 120, head_models);
  run_criterion(10, "tensor, checkpoint and split round trips", 5, round_trips);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
