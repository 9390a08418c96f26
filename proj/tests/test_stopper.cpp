#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "warmstop/stopper.hpp"

using namespace warmstop;

namespace {

MeasurementSeries indexed(int n) {
  MeasurementSeries s{{"p", "p.B", 0}, {}, 1.0};
  for (int i = 1; i <= n; ++i) s.values.push_back(static_cast<double>(i));
  return s;
}

ClassifierHandle constant(Label label) {
  return {[label](std::span<const double>) { return label; }, "constant"};
}

// Knows the truth: values equal their 1-based index, so a window is stable
// once its first value reaches st.
ClassifierHandle oracle_for(int st) {
  return {[st](std::span<const double> w) { return w.front() >= st ? Label::Stable : Label::Unstable; }, "oracle"};
}

}  // namespace

TEST_CASE("always stable halts immediately") {
  const auto r = run_stopper(indexed(3000), constant(Label::Stable), {});
  CHECK(r.warmup_iterations == 0);
  CHECK(r.halt_reason == HaltReason::ModelStable);
  CHECK(r.queries == 1);
  REQUIRE(r.measurements.size() == 100);
  CHECK(r.measurements.front() == 1.0);
  CHECK(r.measurements.back() == 100.0);
}

TEST_CASE("always unstable halts at the cap") {
  const auto r = run_stopper(indexed(3000), constant(Label::Unstable), {});
  CHECK(r.warmup_iterations == 500);
  CHECK(r.halt_reason == HaltReason::CapReached);
  CHECK(r.queries == 501);
  CHECK(r.measurements.front() == 501.0);
  CHECK(r.measurements.size() == 100);
}

TEST_CASE("oracle classifier stops one before st") {
  const auto r = run_stopper(indexed(3000), oracle_for(137), {});
  CHECK(r.warmup_iterations == 136);
  CHECK(r.halt_reason == HaltReason::ModelStable);
  CHECK(r.measurements.front() == 137.0);
  CHECK(r.measurements.back() == 236.0);
  CHECK(r.queries == 137);
}

TEST_CASE("oracle property over random st") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> length(200, 3000);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = length(rng);
    StopConfig cfg;
    const int st = std::uniform_int_distribution<int>(1, std::min(n - cfg.window + 1, cfg.max_warmup_iterations + 1))(rng);
    const auto r = run_stopper(indexed(n), oracle_for(st), cfg);
    CHECK(r.warmup_iterations == st - 1);
    CHECK(r.queries == r.warmup_iterations + 1);
    CHECK(r.measurements.size() == static_cast<std::size_t>(cfg.window));

    const auto u = run_stopper(indexed(n), constant(Label::Unstable), cfg);
    CHECK(u.warmup_iterations == std::min(cfg.max_warmup_iterations, n - cfg.window));
  }
}

TEST_CASE("short series exhaust before the cap") {
  const auto r = run_stopper(indexed(300), constant(Label::Unstable), {});
  CHECK(r.halt_reason == HaltReason::SeriesExhausted);
  CHECK(r.warmup_iterations == 200);
  CHECK(r.measurements.back() == 300.0);
  CHECK_THROWS_AS(run_stopper(indexed(99), constant(Label::Stable), {}), DataError);
}

TEST_CASE("a cap of zero queries once") {
  StopConfig cfg;
  cfg.max_warmup_iterations = 0;
  const auto r = run_stopper(indexed(500), constant(Label::Unstable), cfg);
  CHECK(r.warmup_iterations == 0);
  CHECK(r.halt_reason == HaltReason::CapReached);
  CHECK(r.queries == 1);
}

TEST_CASE("halt reason strings round-trip") {
  for (auto h : {HaltReason::ModelStable, HaltReason::CapReached, HaltReason::SeriesExhausted, HaltReason::Fixed}) {
    CHECK(halt_reason_from_string(to_string(h)) == h);
  }
  CHECK_THROWS_AS(halt_reason_from_string("bogus"), DataError);
}

TEST_CASE("run_corpus uses the fold model of each benchmark") {
  CHECK(run_corpus({}, {}, {}, {}).empty());

  std::vector<MeasurementSeries> corpus = {indexed(1000), indexed(1000)};
  corpus[1].id.benchmark = "p.C";
  const std::map<std::string, int> folds = {{"p.B", 0}, {"p.C", 1}};
  const std::vector<ClassifierHandle> models = {oracle_for(50), oracle_for(80)};
  const auto records = run_corpus(corpus, folds, models, {});
  REQUIRE(records.size() == 2);
  CHECK(records[0].result.warmup_iterations == 49);
  CHECK(records[1].result.warmup_iterations == 79);
  CHECK(records[1].classifier == "oracle");

  CHECK_THROWS_WITH_AS(run_corpus(corpus, {{"p.B", 0}}, models, {}), doctest::Contains("missing from fold map"),
                       DataError);
  CHECK_THROWS_WITH_AS(run_corpus(corpus, {{"p.B", 0}, {"p.C", 3}}, models, {}),
                       doctest::Contains("missing fold model"), DataError);
}

TEST_CASE("config validation") {
  StopConfig cfg;
  cfg.window = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.max_warmup_iterations = -1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
