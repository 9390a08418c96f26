#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "warmstop/rocket.hpp"

using namespace warmstop;

namespace {

// Stable windows are white noise; unstable windows carry a level shift.
std::vector<double> toy_segment(std::mt19937_64& rng, bool stable, int w = 60) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> at(10, w - 10);
  const int shift = at(rng);
  std::vector<double> v(w);
  for (int i = 0; i < w; ++i) v[i] = 5.0 + 0.05 * normal(rng) + (!stable && i < shift ? 1.0 : 0.0);
  return v;
}

SegmentDataset toy_dataset(int benchmarks, int per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SegmentDataset ds;
  for (int b = 0; b < benchmarks; ++b) {
    for (int k = 0; k < 2 * per_class; ++k) {
      LabeledSegment item;
      item.segment.source = {"p", "p.B" + std::to_string(b), 0};
      item.segment.start = k + 1;
      item.label = k % 2 == 0 ? Label::Stable : Label::Unstable;
      item.segment.values = toy_segment(rng, item.label == Label::Stable);
      ds.items.push_back(item);
    }
    ds.fold_assignment["p.B" + std::to_string(b)] = b % 5;
  }
  return ds;
}

RocketModel toy_model(int kernels = 100) {
  const auto ds = toy_dataset(4, 20, 1);
  std::vector<std::span<const double>> segs;
  std::vector<Label> labels;
  for (const auto& item : ds.items) {
    segs.emplace_back(item.segment.values);
    labels.push_back(item.label);
  }
  RocketConfig cfg;
  cfg.num_kernels = kernels;
  cfg.seed = 8;
  return fit_rocket(segs, labels, 60, cfg);
}

}  // namespace

TEST_CASE("kernel bank properties") {
  const auto bank = generate_kernels(500, 100, 42);
  REQUIRE(bank.size() == 500);
  for (const auto& k : bank) {
    CHECK((k.length() == 7 || k.length() == 9 || k.length() == 11));
    double sum = 0.0;
    for (double w : k.weights) sum += w;
    CHECK(std::abs(sum) < 1e-9);
    CHECK(k.bias >= -1.0);
    CHECK(k.bias <= 1.0);
    CHECK(k.dilation >= 1);
    CHECK((k.length() - 1) * k.dilation <= 99 + 2 * k.padding);
    CHECK((k.padding == 0 || k.padding == (k.length() - 1) * k.dilation / 2));
  }
  CHECK(bank == generate_kernels(500, 100, 42));
  CHECK_FALSE(bank == generate_kernels(500, 100, 43));
}

TEST_CASE("hand convolution on an alternating input") {
  Kernel k{{1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0}, 0.0, 1, 0};
  std::vector<double> x(10);
  for (int i = 0; i < 10; ++i) x[i] = i % 2 == 0 ? 1.0 : 0.0;
  // Four valid positions with activations x[i] - x[i+1] = +1, -1, +1, -1.
  const auto f = apply_kernel(x, k);
  CHECK(f.max == doctest::Approx(1.0));
  CHECK(f.ppv == doctest::Approx(0.5));

  k.padding = 3;
  // Padded positions -3..6: activations 0,0,0,+1,-1,+1,-1,+1,-1,+1 -> 4 of 10 positive.
  const auto g = apply_kernel(x, k);
  CHECK(g.ppv == doctest::Approx(0.4));
}

TEST_CASE("zero input yields the bias everywhere") {
  const std::vector<double> zeros(100, 0.0);
  for (const auto& k : generate_kernels(200, 100, 5)) {
    const auto f = apply_kernel(zeros, k);
    CHECK(f.max == doctest::Approx(k.bias));
    CHECK(f.ppv == (k.bias > 0.0 ? 1.0 : 0.0));
  }
}

TEST_CASE("features are bounded, finite and deterministic") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto bank = generate_kernels(100, 100, 3);
  std::vector<std::vector<double>> raw(30, std::vector<double>(100));
  for (auto& s : raw) {
    for (auto& v : s) v = 1.0 + normal(rng);
  }
  raw[0].assign(100, 4.2);  // degenerate
  std::vector<std::span<const double>> views(raw.begin(), raw.end());
  const auto a = transform_segments(views, bank);
  const auto b = transform_segments(views, bank);
  CHECK(a == b);
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      CHECK(std::isfinite(a(r, c)));
      if (c % 2 == 1) {
        CHECK(a(r, c) >= 0.0);
        CHECK(a(r, c) <= 1.0);
      }
    }
  }
}

TEST_CASE("prediction is invariant under positive affine rescaling") {
  const auto model = toy_model();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> scale(0.001, 1000.0), shift(-10.0, 10.0);
  for (int t = 0; t < 200; ++t) {
    const auto s = toy_segment(rng, t % 2 == 0);
    const double a = scale(rng), b = shift(rng);
    std::vector<double> y(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) y[i] = a * s[i] + b;
    CHECK(predict(model, s) == predict(model, y));
  }
}

TEST_CASE("sign rule and window check") {
  auto model = toy_model(20);
  std::fill(model.weights.begin(), model.weights.end(), 0.0);
  const std::vector<double> seg(60, 1.0);
  model.intercept = 0.7;
  CHECK(predict(model, seg) == Label::Stable);
  model.intercept = 0.0;
  CHECK(predict(model, seg) == Label::Unstable);
  CHECK_THROWS_AS(predict(model, std::vector<double>(59, 1.0)), std::invalid_argument);
}

TEST_CASE("toy problem is learnable") {
  const auto model = toy_model();
  std::mt19937_64 rng(123);
  int correct = 0;
  for (int t = 0; t < 200; ++t) {
    const bool stable = t % 2 == 0;
    correct += (predict(model, toy_segment(rng, stable)) == Label::Stable) == stable;
  }
  CHECK(correct >= 180);
}

TEST_CASE("model save and load") {
  const auto model = toy_model();
  const auto dir = std::filesystem::temp_directory_path() / "warmstop_test_rocket";
  std::filesystem::create_directories(dir);
  const auto path = dir / "model.bin";
  save_model(model, path);
  const auto loaded = load_model(path, 60);
  CHECK(loaded == model);

  std::mt19937_64 rng(4);
  for (int t = 0; t < 1000; ++t) {
    const auto s = toy_segment(rng, t % 3 == 0);
    CHECK(decision_score(loaded, s) == decision_score(model, s));
  }

  CHECK_THROWS_WITH_AS(load_model(path, 100), doctest::Contains("window mismatch"), ModelFormatError);

  auto bytes = serialize_model(model);
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_WITH_AS(deserialize_model(bad), doctest::Contains("bad magic header"), ModelFormatError);
  bad = bytes;
  bad[8] = 9;
  CHECK_THROWS_WITH_AS(deserialize_model(bad), doctest::Contains("unsupported model version"), ModelFormatError);
  bad.assign(bytes.begin(), bytes.begin() + bytes.size() / 2);
  CHECK_THROWS_WITH_AS(deserialize_model(bad), doctest::Contains("truncated"), ModelFormatError);
  bad = bytes;
  bad.push_back(0);
  CHECK_THROWS_AS(deserialize_model(bad), ModelFormatError);

  std::filesystem::remove_all(dir);
}

TEST_CASE("cross-validation partitions benchmarks") {
  const auto ds = toy_dataset(10, 10, 2);
  RocketConfig cfg;
  cfg.num_kernels = 50;
  cfg.seed = 1;
  const auto cv = cross_validate(ds, 5, cfg);
  CHECK(cv.models.size() == 5);
  REQUIRE(cv.predictions.size() == ds.items.size());
  std::set<std::size_t> seen;
  for (const auto& p : cv.predictions) {
    seen.insert(p.item);
    CHECK(p.fold == ds.fold_of(ds.items[p.item]));
    CHECK(p.truth == ds.items[p.item].label);
    CHECK(p.predicted == predict(cv.models[p.fold], ds.items[p.item].segment.values));
  }
  CHECK(seen.size() == ds.items.size());

  const auto again = cross_validate(ds, 5, cfg);
  CHECK(again.models == cv.models);

  CHECK_THROWS_WITH_AS(cross_validate({}, 5, cfg), "empty dataset", DataError);
  CHECK_THROWS_WITH_AS(fit_rocket({}, {}, 60, cfg), "empty dataset", DataError);
}
