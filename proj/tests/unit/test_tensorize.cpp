#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include <eventcube/error.hpp>
#include <eventcube/tensorize.hpp>

#include "test_support.hpp"

using namespace eventcube;

namespace {

BinningConfig config(std::uint32_t nt, std::uint32_t ne, std::uint32_t nd, ModalityBounds bounds,
                     CountScaling scaling = CountScaling::Raw, ModalityTransform tr = ModalityTransform::Log10) {
  BinningConfig c;
  c.n_tau = nt;
  c.n_eps = ne;
  c.n_dtau = nd;
  c.bounds = bounds;
  c.scaling = scaling;
  c.transform = tr;
  return c;
}

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("degenerate normalization example") {
  EventSeries s{"d", {2, 4, 6}, {10, 10, 10}, {}};
  const auto ns = normalize_series(s, config(4, 4, 4, PerSeriesBounds{}));
  CHECK(ns.tau == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(ns.dtau == std::vector<double>{0.0, 0.0, 0.0});
  for (std::size_t k = 0; k < 3; ++k) CHECK(ns.eps_coord(k) == 0.0);
}

TEST_CASE("gap assignment example") {
  EventSeries s{"g", {0, 1, 3}, {1, 2, 3}, {}};
  const auto ns = normalize_series(s, config(4, 4, 4, PerSeriesBounds{}, CountScaling::Raw, ModalityTransform::Identity));
  CHECK(ns.tau[0] == 0.0);
  CHECK(ns.tau[1] == doctest::Approx(1.0 / 3.0));
  CHECK(ns.tau[2] == 1.0);
  CHECK(ns.dtau == std::vector<double>{0.0, 0.0, 1.0});
  CHECK(ns.eps == std::vector<double>{1, 2, 3});
}

TEST_CASE("affine map of time leaves tau and dtau unchanged") {
  std::mt19937_64 rng(1);
  const auto s = testsupport::random_series(rng, 30);
  auto moved = s;
  for (double& t : moved.time) t = 5.0 * t + 7.0;
  const auto cfg = config(4, 4, 4, PerSeriesBounds{});
  const auto a = normalize_series(s, cfg), b = normalize_series(moved, cfg);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a.tau[k] == doctest::Approx(b.tau[k]).epsilon(1e-12));
    CHECK(a.dtau[k] == doctest::Approx(b.dtau[k]).epsilon(1e-12));
    CHECK(a.eps[k] == b.eps[k]);
  }
}

TEST_CASE("edge example with global bounds") {
  EventSeries s{"e", {0, 10}, {1, 100}, {}};
  const auto t = tensorize(s, config(2, 2, 1, GlobalBounds{0.0, 2.0}));
  const auto& cube = std::get<CubeTensor>(t);
  CHECK(cube.at(0, 0, 0) == 1.0);
  CHECK(cube.at(1, 1, 0) == 1.0);
  CHECK(sum(cube.values) == 2.0);
}

TEST_CASE("tensor sizes") {
  std::mt19937_64 rng(2);
  const auto s = testsupport::random_series(rng, 50);
  CHECK(tensor_values(tensorize(s, config(24, 16, 16, PerSeriesBounds{}))).size() == 6144);
  CHECK(tensor_values(tensorize(s, config(24, 16, 0, PerSeriesBounds{}))).size() == 384);
  const auto single = tensorize(s, config(1, 1, 0, PerSeriesBounds{}));
  CHECK(std::get<MapTensor>(single).values == std::vector<double>{50.0});
}

TEST_CASE("binning equals the brute-force histogram") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = testsupport::random_series(rng, 50);
    const bool map = trial % 2 == 1;
    const bool global = trial % 3 == 0;
    const auto cfg = config(4, 4, map ? 0 : 4, global ? ModalityBounds{GlobalBounds{2.6, 3.4}} : PerSeriesBounds{});
    const auto t = tensorize(s, cfg);
    const auto oracle = testsupport::brute_force_counts(s, 4, 4, map ? 0 : 4, true, 2.6, 3.4, !global);
    const auto values = tensor_values(t);
    CHECK(std::vector<double>(values.begin(), values.end()) == oracle);
    CHECK(sum(values) == 50.0);
  }
}

TEST_CASE("count scalings") {
  std::mt19937_64 rng(4);
  const auto s = testsupport::random_series(rng, 37);
  const auto raw = tensorize(s, config(3, 3, 3, PerSeriesBounds{}));
  const auto unit = tensorize(s, config(3, 3, 3, PerSeriesBounds{}, CountScaling::UnitSum));
  const auto logc = tensorize(s, config(3, 3, 3, PerSeriesBounds{}, CountScaling::Log1p));
  CHECK(sum(tensor_values(unit)) == doctest::Approx(1.0).epsilon(1e-9));
  const auto r = tensor_values(raw), l = tensor_values(logc), u = tensor_values(unit);
  for (std::size_t i = 0; i < r.size(); ++i) {
    CHECK(l[i] == doctest::Approx(std::log1p(r[i])));
    CHECK(u[i] == doctest::Approx(r[i] / 37.0));
    CHECK(r[i] >= 0.0);
  }
}

TEST_CASE("modality bin depends only on the event under global bounds") {
  std::mt19937_64 rng(5);
  const auto cfg = config(1, 8, 0, GlobalBounds{2.0, 4.0});
  const auto s = testsupport::random_series(rng, 20);
  const auto full = std::get<MapTensor>(tensorize(s, cfg));
  std::vector<double> per_event(8, 0.0);
  for (std::size_t k = 0; k < s.size(); ++k) {
    EventSeries one{"x", {0.0, 1.0}, {s.energy[k], s.energy[k]}, {}};
    const auto m = std::get<MapTensor>(tensorize(one, cfg));
    for (std::size_t j = 0; j < 8; ++j) per_event[j] += m.at(0, j) / 2.0;
  }
  CHECK(full.values == per_event);
}

TEST_CASE("normalization errors") {
  EventSeries one{"o", {1.0}, {5.0}, {}};
  try {
    normalize_series(one, config(2, 2, 2, PerSeriesBounds{}));
    FAIL("expected TooFewEvents");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::TooFewEvents);
    CHECK(e.series_id() == "o");
  }
  auto lenient = config(2, 2, 2, PerSeriesBounds{});
  lenient.strict = false;
  const auto t = tensorize(one, lenient);
  CHECK(sum(tensor_values(t)) == 1.0);

  EventSeries neg{"n", {0, 1}, {5.0, -1.0}, {}};
  try {
    normalize_series(neg, config(2, 2, 2, PerSeriesBounds{}));
    FAIL("expected NonPositiveModality");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NonPositiveModality);
  }
  CHECK_THROWS_AS(config(0, 2, 2, PerSeriesBounds{}).validate(), Error);
  CHECK_THROWS_AS(config(2, 2, 2, GlobalBounds{1.0, 1.0}).validate(), Error);
}

TEST_CASE("dataset bounds resolve to the global range") {
  std::vector<EventSeries> data{{"a", {0, 1}, {10, 100}, {}}, {"b", {0, 1}, {1000, 1000}, {}}};
  const auto cfg = resolve_bounds(BinningConfig{}, data);
  const auto& g = std::get<GlobalBounds>(cfg.bounds);
  CHECK(g.lo == doctest::Approx(1.0));
  CHECK(g.hi == doctest::Approx(3.0));
  CHECK_THROWS_AS(normalize_series(data[0], BinningConfig{}), Error);
}

TEST_CASE("tensor file round trip") {
  testsupport::TempDir dir("tensor");
  std::mt19937_64 rng(6);
  const auto s = testsupport::random_series(rng, 200, "rt_1");
  for (std::uint32_t nd : {0u, 5u}) {
    for (auto scaling : {CountScaling::Raw, CountScaling::UnitSum, CountScaling::Log1p}) {
      const auto t = tensorize(s, config(6, 5, nd, PerSeriesBounds{}, scaling));
      const auto path = dir / ("t" + std::string(tensor_extension(t)));
      write_tensor(t, path);
      const auto back = read_tensor(path);
      CHECK(back.index() == t.index());
      CHECK(tensor_series_id(back) == "rt_1");
      CHECK(tensor_scaling(back) == scaling);
      CHECK(tensor_dims(back) == tensor_dims(t));
      const auto a = tensor_values(t), b = tensor_values(back);
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == static_cast<double>(static_cast<float>(a[i])));
      CHECK(encode_tensor(back) == encode_tensor(t));
      if (scaling == CountScaling::Raw) CHECK(back == t);
    }
  }
}

TEST_CASE("tensor decode errors") {
  std::mt19937_64 rng(7);
  const auto t = tensorize(testsupport::random_series(rng, 30), config(24, 16, 16, PerSeriesBounds{}));
  const auto bytes = encode_tensor(t);
  auto expect = [](std::vector<std::uint8_t> b, Errc code) {
    try {
      decode_tensor(b);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.code() == code);
    }
  };
  auto bad = bytes;
  bad[1] = 'X';
  expect(bad, Errc::BadMagic);
  auto version = bytes;
  version[4] = 2;
  expect(version, Errc::VersionMismatch);
  // header (4 + 2 + 1 + 12 + 4 bytes) plus 10 floats
  expect(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 23 + 40), Errc::TruncatedFile);
  auto extra = bytes;
  extra.push_back(0);
  expect(extra, Errc::DimMismatch);
}
