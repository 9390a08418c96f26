#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "warmstop/steady_state.hpp"

using namespace warmstop;

namespace {

MeasurementSeries series_of(std::vector<double> v) { return {{"p", "p.B", 0}, std::move(v), 1.0}; }

std::vector<double> random_piecewise(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> pieces(1, 4);
  std::uniform_real_distribution<double> level(1.0, 3.0), sd(0.01, 0.3);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int k = pieces(rng);
  std::vector<double> v;
  for (int p = 0; p < k; ++p) {
    const double mu = level(rng), s = sd(rng);
    const int len = p + 1 == k ? n - static_cast<int>(v.size()) : n / k;
    for (int i = 0; i < len; ++i) v.push_back(mu + s * normal(rng));
  }
  return v;
}

SegmentStats seg(int start, int end, double mean) { return {start, end, mean, 0.0}; }

}  // namespace

TEST_CASE("constant series has no changepoints") {
  const auto r = pelt_changepoints(std::vector<double>(100, 2.5), {});
  CHECK(r.changepoints.empty());
  REQUIRE(r.segments.size() == 1);
  CHECK(r.segments[0].start == 1);
  CHECK(r.segments[0].end == 100);
}

TEST_CASE("single level shift is found at 50 +- 1") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<double> v;
  for (int i = 0; i < 50; ++i) v.push_back(10.0 + noise(rng));
  for (int i = 0; i < 50; ++i) v.push_back(1.0 + noise(rng));
  const auto r = pelt_changepoints(v, {});
  REQUIRE(r.changepoints.size() == 1);
  CHECK(std::abs(r.changepoints[0] - 50) <= 1);

  // Brute force over every single split position agrees.
  const auto x = oracle::normalize(v);
  int best = -1;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int s = 5; s <= 95; ++s) {
    const double c = oracle::segment_cost(x, 0, s) + oracle::segment_cost(x, s, 100);
    if (c < best_cost) {
      best_cost = c;
      best = s;
    }
  }
  CHECK(r.changepoints[0] == best);
}

TEST_CASE("infinite penalty gives zero changepoints") {
  std::mt19937_64 rng(5);
  SteadyStateConfig cfg;
  cfg.penalty = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 20; ++t) CHECK(pelt_changepoints(random_piecewise(rng, 80), cfg).changepoints.empty());
}

TEST_CASE("too short for two minimum segments") {
  CHECK_THROWS_WITH_AS(pelt_changepoints(std::vector<double>(9, 1.0), {}), "insufficient data", DataError);
}

TEST_CASE("PELT equals unpruned optimal partitioning and full enumeration") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> length(10, 50);
  std::uniform_real_distribution<double> beta(1.0, 30.0);
  for (int trial = 0; trial < 150; ++trial) {
    const int n = trial < 50 ? 8 + trial % 9 : length(rng);
    const auto v = random_piecewise(rng, n);
    SteadyStateConfig cfg;
    cfg.min_segment_length = 2 + trial % 3;
    cfg.penalty = beta(rng);
    const auto r = pelt_changepoints(v, cfg);
    const auto dp = oracle::optimal_partition(v, *cfg.penalty, cfg.min_segment_length);
    CHECK(r.changepoints == dp.changepoints);
    CHECK(r.cost == doctest::Approx(dp.objective).epsilon(1e-9));
    if (n <= 16) {
      const auto full = oracle::enumerate_partitions(v, *cfg.penalty, cfg.min_segment_length);
      CHECK(r.changepoints == full.changepoints);
    }
  }
}

TEST_CASE("raising the penalty never adds changepoints") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const auto v = random_piecewise(rng, 200);
    std::size_t previous = std::numeric_limits<std::size_t>::max();
    for (double beta : {1.0, 5.0, 20.0, 80.0, 300.0, 1000.0}) {
      SteadyStateConfig cfg;
      cfg.penalty = beta;
      const auto k = pelt_changepoints(v, cfg).changepoints.size();
      CHECK(k <= previous);
      previous = k;
    }
  }
}

TEST_CASE("classify: single segment is steady from the start") {
  const auto s = series_of(std::vector<double>(500, 1.0));
  ChangePointResult r;
  r.segments = {seg(1, 500, 1.0)};
  CHECK(classify_steady_state(s, r, {}) == SteadyStateAnnotation::at(1));
}

TEST_CASE("classify: two distinct means start at the second segment") {
  const auto s = series_of(std::vector<double>(500, 1.0));
  ChangePointResult r;
  r.changepoints = {200};
  r.segments = {seg(1, 200, 10.0), seg(201, 500, 1.0)};
  CHECK(classify_steady_state(s, r, {}) == SteadyStateAnnotation::at(201));
}

TEST_CASE("classify: equivalent segments are merged backwards") {
  const auto s = series_of(std::vector<double>(600, 1.0));
  ChangePointResult r;
  r.segments = {seg(1, 100, 2.0), seg(101, 300, 1.03), seg(301, 400, 0.98), seg(401, 600, 1.0)};
  CHECK(classify_steady_state(s, r, {}) == SteadyStateAnnotation::at(101));
}

TEST_CASE("classify: a final run starting inside the tail is not reached") {
  // 2950 > 3000 - 100
  const auto s = series_of(std::vector<double>(3000, 1.0));
  ChangePointResult r;
  r.segments = {seg(1, 2949, 5.0), seg(2950, 3000, 1.0)};
  CHECK_FALSE(classify_steady_state(s, r, {}).reached());
  r.segments = {seg(1, 2899, 5.0), seg(2900, 3000, 1.0)};
  CHECK(classify_steady_state(s, r, {}) == SteadyStateAnnotation::at(2900));
}

TEST_CASE("annotation is a segment start and deterministic") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const auto s = series_of(random_piecewise(rng, 400));
    const auto cps = pelt_changepoints(s, {});
    const auto a = classify_steady_state(s, cps, {});
    CHECK(a == annotate_series(s, {}));
    if (a.reached()) {
      bool is_start = false;
      for (const auto& g : cps.segments) is_start |= g.start == *a.st;
      CHECK(is_start);
    }
  }
}

TEST_CASE("annotate_corpus") {
  CHECK(annotate_corpus({}, {}).annotations.empty());

  std::vector<MeasurementSeries> corpus;
  for (int f = 0; f < 3; ++f) corpus.push_back({{"p", "p.B", f}, std::vector<double>(300, 2.0 + f), 1.0});
  corpus.push_back({{"p", "p.C", 0}, {1.0, 2.0}, 1.0});
  const auto batch = annotate_corpus(corpus, {});
  CHECK(batch.annotations.size() == 3);
  for (const auto& [id, a] : batch.annotations) CHECK(a == SteadyStateAnnotation::at(1));
  REQUIRE(batch.errors.size() == 1);
  CHECK(batch.errors[0].first.benchmark == "p.C");
}

TEST_CASE("config validation") {
  SteadyStateConfig cfg;
  cfg.min_segment_length = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.penalty = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  CHECK(cfg.penalty_for(3000) == doctest::Approx(15.0 * std::log(3000.0)));
}
