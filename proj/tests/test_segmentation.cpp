#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <random>
#include <set>

#include "warmstop/segmentation.hpp"

using namespace warmstop;

namespace {

MeasurementSeries ramp(const std::string& project, const std::string& bench, int fork, int n) {
  MeasurementSeries s{{project, bench, fork}, {}, 1.0};
  for (int i = 1; i <= n; ++i) s.values.push_back(static_cast<double>(i));
  return s;
}

SegmentDataset dataset_with_benchmarks(const std::map<std::string, int>& per_project) {
  SegmentDataset ds;
  for (const auto& [project, count] : per_project) {
    for (int b = 0; b < count; ++b) {
      LabeledSegment item;
      item.segment.source = {project, project + ".B" + std::to_string(b), 0};
      item.segment.values = {1.0, 2.0};
      ds.items.push_back(item);
    }
  }
  return ds;
}

}  // namespace

TEST_CASE("step arithmetic") {
  const auto s = sampling_steps(3000, 1001, 50);
  CHECK(s.unstable == 20);  // floor(1000 / 50)
  CHECK(s.stable == 39);    // floor(1999 / 50)
}

TEST_CASE("segments for n = 3000, st = 1001") {
  const auto series = ramp("p", "p.B", 0, 3000);
  const auto items = sample_segments(series, SteadyStateAnnotation::at(1001), {});
  std::vector<int> unstable, stable;
  for (const auto& it : items) {
    (it.label == Label::Stable ? stable : unstable).push_back(it.segment.start);
    REQUIRE(it.segment.values.size() == 100);
    // values of the ramp equal their 1-based iteration index
    CHECK(it.segment.values.front() == it.segment.start);
  }
  REQUIRE(unstable.size() == 50);
  for (std::size_t k = 0; k < unstable.size(); ++k) CHECK(unstable[k] == 1 + 20 * static_cast<int>(k));
  // Stable starts 1001 + 39k; windows must end by 3000, so k <= 48.
  REQUIRE(stable.size() == 49);
  for (std::size_t k = 0; k < stable.size(); ++k) CHECK(stable[k] == 1001 + 39 * static_cast<int>(k));
}

TEST_CASE("no warm-up gives only stable segments") {
  const auto items = sample_segments(ramp("p", "p.B", 0, 3000), SteadyStateAnnotation::at(1), {});
  CHECK(items.size() == 50);
  for (const auto& it : items) CHECK(it.label == Label::Stable);
}

TEST_CASE("short warm-up uses every start") {
  const auto items = sample_segments(ramp("p", "p.B", 0, 1000), SteadyStateAnnotation::at(21), {});
  int unstable = 0;
  for (const auto& it : items) {
    if (it.label == Label::Unstable) CHECK(it.segment.start == ++unstable);
  }
  CHECK(unstable == 20);
}

TEST_CASE("unreached series is rejected") {
  CHECK_THROWS_WITH_AS(sample_segments(ramp("p", "p.B", 0, 500), SteadyStateAnnotation::never(), {}),
                       "no steady state", DataError);
}

TEST_CASE("sampling properties over random series") {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> length(150, 3000);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = length(rng);
    const int st = std::uniform_int_distribution<int>(1, n)(rng);
    const auto series = ramp("p", "p.B", 0, n);
    SamplingConfig cfg;
    const auto items = sample_segments(series, SteadyStateAnnotation::at(st), cfg);
    CHECK(items.size() <= 2u * cfg.per_class_per_series);
    const auto steps = sampling_steps(n, st, cfg.per_class_per_series);
    std::map<Label, std::vector<int>> starts;
    for (const auto& it : items) {
      CHECK((it.segment.start >= st) == (it.label == Label::Stable));
      CHECK(it.segment.start + cfg.window - 1 <= n);
      starts[it.label].push_back(it.segment.start);
    }
    for (const auto& [label, s] : starts) {
      const int step = label == Label::Stable ? steps.stable : steps.unstable;
      for (std::size_t k = 1; k < s.size(); ++k) CHECK(s[k] - s[k - 1] == std::max(step, 1));
    }
  }
}

TEST_CASE("build_dataset adds segments and skips unreached series") {
  std::vector<MeasurementSeries> corpus = {ramp("p", "p.A", 0, 3000), ramp("p", "p.B", 0, 3000),
                                           ramp("p", "p.C", 0, 3000)};
  AnnotationMap ann = {{corpus[0].id, SteadyStateAnnotation::at(1001)},
                       {corpus[1].id, SteadyStateAnnotation::at(501)},
                       {corpus[2].id, SteadyStateAnnotation::never()}};
  const auto build = build_dataset(corpus, ann, {});
  CHECK(build.series_used == 2);
  CHECK(build.series_skipped == 1);
  CHECK(build.warnings.size() == 1);
  const auto a = sample_segments(corpus[0], ann[corpus[0].id], {}).size();
  const auto b = sample_segments(corpus[1], ann[corpus[1].id], {}).size();
  CHECK(build.dataset.items.size() == a + b);
  CHECK(count_label_violations(build.dataset, ann) == 0);

  AnnotationMap none = {{corpus[0].id, SteadyStateAnnotation::never()}};
  const auto empty = build_dataset({corpus[0]}, none, {});
  CHECK(empty.dataset.items.empty());
  CHECK(empty.warnings.size() == 1);
}

TEST_CASE("label violations are detected") {
  const auto series = ramp("p", "p.A", 0, 1000);
  SegmentDataset ds;
  ds.items = sample_segments(series, SteadyStateAnnotation::at(301), {});
  AnnotationMap ann = {{series.id, SteadyStateAnnotation::at(301)}};
  CHECK(count_label_violations(ds, ann) == 0);
  ds.items[0].label = Label::Stable;
  CHECK(count_label_violations(ds, ann) == 1);
}

TEST_CASE("ten benchmarks in one project give two per fold") {
  const auto ds = assign_folds(dataset_with_benchmarks({{"p", 10}}), {});
  std::map<int, int> sizes;
  for (const auto& [b, f] : ds.fold_assignment) ++sizes[f];
  REQUIRE(sizes.size() == 5);
  for (const auto& [f, n] : sizes) CHECK(n == 2);
}

TEST_CASE("seven benchmarks in a project give fold sizes of one or two") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SamplingConfig cfg;
    cfg.seed = seed;
    const auto ds = assign_folds(dataset_with_benchmarks({{"a", 3}, {"b", 7}, {"c", 4}}), cfg);
    std::map<int, int> sizes;
    for (const auto& [b, f] : ds.fold_assignment) {
      if (b.rfind("b.", 0) == 0) ++sizes[f];
    }
    for (int f = 0; f < 5; ++f) {
      CHECK(sizes[f] >= 1);
      CHECK(sizes[f] <= 2);
    }
  }
}

TEST_CASE("folds group every segment of a benchmark") {
  auto ds = dataset_with_benchmarks({{"p", 6}, {"q", 6}});
  ds.items.insert(ds.items.end(), ds.items.begin(), ds.items.end());
  ds = assign_folds(ds, {});
  for (const auto& item : ds.items) {
    CHECK(ds.fold_of(item) == ds.fold_assignment.at(item.segment.source.benchmark));
  }
  for (int f = 0; f < 5; ++f) {
    std::set<std::string> train, test;
    for (const auto& item : ds.items) (ds.fold_of(item) == f ? test : train).insert(item.segment.source.benchmark);
    for (const auto& b : test) CHECK(train.count(b) == 0);
  }
}

TEST_CASE("fold assignment errors and determinism") {
  CHECK_THROWS_WITH_AS(assign_folds({}, {}), "empty dataset", DataError);
  CHECK_THROWS_AS(assign_folds(dataset_with_benchmarks({{"p", 3}}), {}), DataError);
  SamplingConfig cfg;
  cfg.seed = 99;
  const auto a = assign_folds(dataset_with_benchmarks({{"p", 12}, {"q", 9}}), cfg);
  const auto b = assign_folds(dataset_with_benchmarks({{"p", 12}, {"q", 9}}), cfg);
  CHECK(a.fold_assignment == b.fold_assignment);
}
