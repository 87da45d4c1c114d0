#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <eventcube/embed.hpp>
#include <eventcube/error.hpp>
#include <eventcube/sae.hpp>

#include "test_support.hpp"

using namespace eventcube;

namespace {

LatentMatrix blobs(std::size_t per_blob, double separation, std::uint64_t seed, std::size_t dim = 6) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  LatentMatrix m;
  m.values.resize(static_cast<Eigen::Index>(2 * per_blob), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < 2 * per_blob; ++i) {
    const double offset = i < per_blob ? 0.0 : separation;
    for (std::size_t k = 0; k < dim; ++k) {
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = g(rng) + (k == 0 ? offset : 0.0);
    }
    m.ids.push_back("p" + std::to_string(i));
    SeriesLabels l;
    l.class_tag = i < per_blob ? "a" : "b";
    m.labels.push_back(l);
  }
  return m;
}

double entropy_perplexity(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0) h -= v * std::log(v);
  }
  return std::exp(h);
}

}  // namespace

TEST_CASE("calibration with a single neighbour") {
  const std::vector<double> d{4.0};
  const auto c = perplexity_calibration(d, 30.0);
  CHECK(c.probabilities == std::vector<double>{1.0});
}

TEST_CASE("equidistant row is uniform for any precision") {
  const std::vector<double> d(9, 2.5);
  const auto exact = perplexity_calibration(d, 9.0);
  CHECK(exact.converged);
  const auto off = perplexity_calibration(d, 4.0);
  CHECK_FALSE(off.converged);
  for (const auto* c : {&exact, &off}) {
    for (double p : c->probabilities) CHECK(p == doctest::Approx(1.0 / 9.0));
  }
}

TEST_CASE("calibration hits the target perplexity") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> d(9);
    for (double& v : d) v = u(rng);
    const auto c = perplexity_calibration(d, 5.0);
    CHECK(c.converged);
    CHECK(c.iterations <= 50);
    CHECK(std::abs(entropy_perplexity(c.probabilities) - 5.0) < 1e-4);
    CHECK(std::accumulate(c.probabilities.begin(), c.probabilities.end(), 0.0) == doctest::Approx(1.0));
  }
}

TEST_CASE("joint and student-t affinities are normalized and symmetric") {
  const auto m = blobs(20, 3.0, 2);
  const auto n = m.rows();
  const auto p = joint_probabilities(m.values, 10.0);
  std::vector<std::array<double, 2>> y(n);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (auto& pt : y) pt = {g(rng), g(rng)};
  const auto q = student_t_affinities(y);
  for (const auto* mat : {&p, &q}) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      CHECK((*mat)[i * n + i] == 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        CHECK((*mat)[i * n + j] >= 0.0);
        CHECK((*mat)[i * n + j] == (*mat)[j * n + i]);
        total += (*mat)[i * n + j];
      }
    }
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
  CHECK(std::isfinite(kl_divergence(p, q)));
  CHECK(kl_divergence(p, p) == 0.0);
}

TEST_CASE("joint affinities are invariant to axis permutations and sign flips") {
  const auto m = blobs(15, 2.0, 4);
  Eigen::MatrixXd rotated(m.values.rows(), m.values.cols());
  for (Eigen::Index k = 0; k < m.values.cols(); ++k) {
    rotated.col(k) = -m.values.col((k + 2) % m.values.cols());
  }
  // Same per-pair sums in the same order require the same column order of
  // squared differences; an axis permutation reorders the sum, so compare
  // with a tight tolerance and a sign flip exactly.
  Eigen::MatrixXd flipped = -m.values;
  CHECK(joint_probabilities(m.values, 8.0) == joint_probabilities(flipped, 8.0));
  const auto a = joint_probabilities(m.values, 8.0), b = joint_probabilities(rotated, 8.0);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("tsne separates two blobs") {
  const auto m = blobs(50, 12.0, 5);
  TsneConfig cfg;
  cfg.perplexity = 20.0;
  cfg.seed = 7;
  const auto e = tsne_project(m, cfg);
  REQUIRE(e.points.size() == 100);
  REQUIRE(e.kl_history.size() == cfg.iterations);
  Eigen::MatrixXd y(100, 2);
  std::vector<int> labels;
  for (std::size_t i = 0; i < 100; ++i) {
    y(static_cast<Eigen::Index>(i), 0) = e.points[i][0];
    y(static_cast<Eigen::Index>(i), 1) = e.points[i][1];
    labels.push_back(i < 50 ? 0 : 1);
  }
  CHECK(silhouette_score(y, labels) > 0.5);
  CHECK(e.kl_history.back() <= e.kl_history[cfg.exaggeration_iters - 1]);
  CHECK(e.kl_history.back() <= e.kl_history.front());
  for (double kl : e.kl_history) CHECK(std::isfinite(kl));

  const auto again = tsne_project(m, cfg);
  CHECK(again.points == e.points);
}

TEST_CASE("tsne on identical rows stays finite") {
  LatentMatrix m;
  m.values = Eigen::MatrixXd::Constant(5, 3, 0.25);
  for (int i = 0; i < 5; ++i) m.ids.push_back("i" + std::to_string(i));
  m.labels.resize(5);
  TsneConfig cfg;
  cfg.perplexity = 2.0;
  cfg.iterations = 300;
  const auto e = tsne_project(m, cfg);
  for (const auto& p : e.points) {
    CHECK(std::isfinite(p[0]));
    CHECK(std::isfinite(p[1]));
  }
  const auto p = joint_probabilities(m.values, 2.0);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) CHECK(p[i * 5 + j] == doctest::Approx(i == j ? 0.0 : 1.0 / 20.0));
  }
}

TEST_CASE("tsne preconditions") {
  LatentMatrix four;
  four.values = Eigen::MatrixXd::Random(4, 2);
  four.ids = {"a", "b", "c", "d"};
  four.labels.resize(4);
  try {
    tsne_project(four);
    FAIL("expected TooFewPoints");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::TooFewPoints);
  }
  auto m = blobs(5, 1.0, 1);
  TsneConfig cfg;
  cfg.iterations = 10;
  cfg.perplexity = 5.0;
  const auto e = tsne_project(m, cfg);
  CHECK_FALSE(e.warnings.empty());
}

TEST_CASE("latent matrix validation and lookup") {
  auto m = blobs(3, 1.0, 2);
  CHECK_NOTHROW(m.validate());
  CHECK(m.find("p4") == 4);
  CHECK_THROWS_AS(m.find("zz"), Error);
  m.ids[1] = m.ids[0];
  CHECK_THROWS_AS(m.validate(), Error);
  m = blobs(3, 1.0, 2);
  m.values(0, 0) = std::nan("");
  CHECK_THROWS_AS(m.validate(), Error);
}

TEST_CASE("latent and embedding csv round trip") {
  testsupport::TempDir dir("embed_csv");
  auto m = blobs(4, 1.0, 3, 3);
  m.labels[2].variability_index = 7.25;
  m.labels[3].hardness_ratio = -0.5;
  write_latents_csv(m, dir / "latents.csv");
  const auto back = read_latents_csv(dir / "latents.csv");
  CHECK(back.ids == m.ids);
  CHECK(back.values == m.values);
  CHECK(back.labels == m.labels);

  Embedding2D e;
  e.ids = m.ids;
  e.labels = m.labels;
  for (std::size_t i = 0; i < m.rows(); ++i) e.points.push_back({0.5 * i, -1.0 / (i + 1)});
  write_embedding_csv(e, dir / "embedding.csv");
  const auto eb = read_embedding_csv(dir / "embedding.csv");
  CHECK(eb.points == e.points);
  CHECK(eb.labels == e.labels);
}

TEST_CASE("extract latents follows catalog order") {
  testsupport::TempDir dir("extract");
  sae::ArchSpec arch;
  arch.input_dims = {4, 3};
  arch.layers = {sae::LayerSpec::flatten(), sae::LayerSpec::dense(5), sae::LayerSpec::dense(2)};
  sae::SaeModel model(arch, 1);
  Catalog cat;
  std::vector<Tensor> tensors;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u;
  for (int i = 0; i < 6; ++i) {
    MapTensor t;
    t.dims = {4, 3};
    t.series_id = "s" + std::to_string(i);
    for (int k = 0; k < 12; ++k) t.values.push_back(u(rng));
    tensors.push_back(t);
    write_tensor(t, dir / (t.series_id + ".etmp"));
    SeriesLabels l;
    l.class_tag = i % 2 ? "odd" : "even";
    cat.entries.push_back({t.series_id, dir / "x.csv", l});
  }
  std::reverse(cat.entries.begin(), cat.entries.end());
  const auto lm = extract_latents(model, cat, tensors);
  REQUIRE(lm.rows() == 6);
  CHECK(lm.dim() == 2);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(lm.ids[i] == cat.entries[i].series_id);
    CHECK(lm.labels[i] == cat.entries[i].labels);
    const auto z = sae::encode(model, tensors[5 - i]);
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(lm.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) == doctest::Approx(z.z[k]).epsilon(1e-5));
    }
  }
  const auto from_disk = extract_latents(model, cat, dir.path());
  CHECK(from_disk.values.isApprox(lm.values));

  cat.entries.push_back({"missing", dir / "x.csv", {}});
  try {
    extract_latents(model, cat, dir.path());
    FAIL("expected MissingTensor");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MissingTensor);
    CHECK(e.series_id() == "missing");
  }
}

TEST_CASE("silhouette oracle values") {
  Eigen::MatrixXd x(4, 1);
  x << 0, 1, 10, 11;
  const std::vector<int> labels{0, 0, 1, 1};
  // a = 1 for every point; b = 10.5, 9.5, 9.5, 10.5.
  const double expected = (2 * (1 - 1 / 10.5) + 2 * (1 - 1 / 9.5)) / 4.0;
  CHECK(silhouette_score(x, labels) == doctest::Approx(expected));
  const std::vector<int> one{0, 0, 0, 0};
  CHECK_THROWS_AS(silhouette_score(x, one), Error);
}
