#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include <eventcube/datagen.hpp>
#include <eventcube/error.hpp>

#include "test_support.hpp"

using namespace eventcube;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("rate function examples") {
  SourceModel steady;
  steady.base_rate = 2.0;
  CHECK(rate_at(steady, 0.0) == 2.0);
  CHECK(rate_at(steady, 1234.5) == 2.0);

  SourceModel dip;
  dip.base_rate = 3.0;
  dip.duration = 100.0;
  dip.shape = DipShape{1.0, 0.4, 0.2};
  CHECK(rate_at(dip, 50.0) == 0.0);
  CHECK(rate_at(dip, 10.0) == 3.0);

  SourceModel pulse;
  pulse.base_rate = 2.0;
  pulse.duration = 1000.0;
  pulse.shape = PulsatingShape{0.5, 100.0};
  CHECK(rate_at(pulse, 25.0) == doctest::Approx(3.0));

  SourceModel flare;
  flare.base_rate = 1.0;
  flare.duration = 1000.0;
  flare.shape = FlareShape{10.0, 10.0, 50.0, 0.5};
  CHECK(rate_at(flare, 499.0) == 1.0);
  CHECK(rate_at(flare, 505.0) == doctest::Approx(6.0));
  CHECK(rate_at(flare, 510.0) == doctest::Approx(11.0));
  CHECK(rate_at(flare, 560.0) == doctest::Approx(1.0 + 10.0 * std::exp(-1.0)));

  CHECK_THROWS_AS(rate_at(steady, -1.0), Error);
  CHECK_THROWS_AS(rate_at(steady, steady.duration + 1.0), Error);
}

TEST_CASE("invalid models are rejected") {
  SourceModel dip;
  dip.shape = DipShape{1.5, 0.1, 0.1};
  CHECK_THROWS_AS(check_model(dip), Error);
  SourceModel pulse;
  pulse.shape = PulsatingShape{1.0, 10.0};
  CHECK_THROWS_AS(check_model(pulse), Error);
  SourceModel zero;
  zero.base_rate = 0.0;
  try {
    sample_series(zero);
    FAIL("expected DegenerateModel");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DegenerateModel);
  }
}

TEST_CASE("sampling is deterministic and labelled") {
  SourceModel m;
  m.shape = FlareShape{};
  m.seed = 99;
  const auto a = sample_series(m), b = sample_series(m);
  CHECK(a.time == b.time);
  CHECK(a.energy == b.energy);
  CHECK(a.labels.class_tag == std::string("flare"));
  const auto v = validate_series(a);
  CHECK(v.time == a.time);
}

TEST_CASE("steady mean count matches the Poisson expectation") {
  SourceModel m;
  m.base_rate = 0.5;
  m.duration = 200.0;
  constexpr int kSeeds = 1000;
  double total = 0.0;
  for (int s = 0; s < kSeeds; ++s) {
    m.seed = static_cast<std::uint64_t>(s) + 1;
    total += static_cast<double>(sample_series(m).size());
  }
  const double rt = m.base_rate * m.duration;
  CHECK(std::abs(total / kSeeds - rt) < 3.0 * std::sqrt(rt / kSeeds));
}

TEST_CASE("thinning matches segment means of a piecewise-constant rate") {
  SourceModel m;
  m.base_rate = 2.0;
  m.duration = 100.0;
  m.shape = DipShape{0.75, 0.3, 0.4};  // rate 0.5 on [30, 70], 2 elsewhere
  constexpr int kSeeds = 2000;
  double low = 0.0, high = 0.0;
  for (int s = 0; s < kSeeds; ++s) {
    m.seed = static_cast<std::uint64_t>(s) * 7 + 3;
    for (double t : sample_series(m).time) (t >= 30.0 && t <= 70.0 ? low : high) += 1.0;
  }
  const double mean_low = 0.5 * 40.0, mean_high = 2.0 * 60.0;
  CHECK(std::abs(low / kSeeds - mean_low) < 3.0 * std::sqrt(mean_low / kSeeds));
  CHECK(std::abs(high / kSeeds - mean_high) < 3.0 * std::sqrt(mean_high / kSeeds));
}

TEST_CASE("generate dataset") {
  testsupport::TempDir dir("gen");
  const auto cat = generate_dataset(standard_classes(50), dir / "a", 123);
  CHECK(cat.size() == 200);
  for (const auto& e : cat.entries) {
    CHECK(e.labels.class_tag.has_value());
    CHECK(e.labels.hardness_ratio.has_value());
    REQUIRE(e.labels.variability_index.has_value());
    CHECK(*e.labels.variability_index >= 0.0);
    CHECK(*e.labels.variability_index <= 10.0);
    CHECK(std::abs(*e.labels.hardness_ratio) <= 1.0);
    CHECK_NOTHROW(load_series(e));
  }
  const auto loaded = load_catalog(dir / "a" / "catalog.jsonl");
  CHECK(loaded.size() == 200);

  generate_dataset(standard_classes(50), dir / "b", 123);
  CHECK(slurp(dir / "a" / "catalog.jsonl") == slurp(dir / "b" / "catalog.jsonl"));
  for (const auto& e : cat.entries) {
    CHECK(slurp(e.file) == slurp(dir / "b" / "events" / e.file.filename()));
  }

  const auto empty = generate_dataset({}, dir / "empty", 1);
  CHECK(empty.empty());
  CHECK_FALSE(std::filesystem::exists(dir / "empty"));
}

TEST_CASE("synthetic labels separate the classes") {
  const auto series = simulate_dataset(standard_classes(20), 5);
  double steady_vi = 0.0, flare_vi = 0.0;
  for (const auto& s : series) {
    if (s.labels.class_tag == std::string("steady")) steady_vi += *s.labels.variability_index;
    if (s.labels.class_tag == std::string("flare")) flare_vi += *s.labels.variability_index;
  }
  CHECK(flare_vi / 20 > 6.0);
  CHECK(steady_vi / 20 < 3.0);
}

TEST_CASE("hardness ratio bands") {
  EventSeries s{"h", {0, 1, 2, 3}, {600, 700, 3000, 8000}, {}};
  CHECK(hardness_ratio(s) == doctest::Approx(-1.0 / 3.0));
  EventSeries none{"n", {0, 1}, {100, 10000}, {}};
  CHECK(hardness_ratio(none) == 0.0);
}
