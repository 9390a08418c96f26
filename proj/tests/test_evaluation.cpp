#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "warmstop/evaluation.hpp"

using namespace warmstop;

namespace {

ForkGroups noisy_forks(std::mt19937_64& rng, int forks, int per_fork, double level) {
  std::normal_distribution<double> normal(0.0, 0.05);
  ForkGroups g(forks);
  for (auto& f : g) {
    for (int i = 0; i < per_fork; ++i) f.push_back(level * (1.0 + normal(rng)));
  }
  return g;
}

RatioCI ci(double lo, double hi) {
  RatioCI c;
  c.lower = lo;
  c.upper = hi;
  c.center = (lo + hi) / 2.0;
  return c;
}

std::vector<Label> labels(int stable, int unstable) {
  std::vector<Label> v(stable, Label::Stable);
  v.insert(v.end(), unstable, Label::Unstable);
  return v;
}

}  // namespace

TEST_CASE("warm-up estimation error") {
  CHECK(wee(136, 137, 1.0) == 0.0);
  CHECK(wee(120, 101, 1.0) == 20.0);
  CHECK(wee(0, 1, 1.0) == 0.0);
  CHECK(wee(10, 137, 0.5) == 63.0);
  CHECK(estimation_category(136, 137) == EstimationCategory::ExactMatch);
  CHECK(estimation_category(10, 137) == EstimationCategory::Underestimate);
  CHECK(estimation_category(200, 137) == EstimationCategory::Overestimate);

  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> w(0, 600), st(1, 600);
  for (int t = 0; t < 1000; ++t) {
    const int a = w(rng), b = st(rng);
    const double e = wee(a, b, 0.3);
    CHECK(e >= 0.0);
    CHECK((e == 0.0) == (estimation_category(a, b) == EstimationCategory::ExactMatch));
  }
}

TEST_CASE("ratio CI on constant data is degenerate") {
  const ForkGroups m(3, std::vector<double>(20, 0.004));
  const auto c = ratio_ci_bootstrap(m, m, 0.05, 10000, 1);
  CHECK(std::abs(c.lower - 1.0) < 1e-12);
  CHECK(std::abs(c.upper - 1.0) < 1e-12);
  CHECK(c.includes_one());

  const ForkGroups twice(3, std::vector<double>(20, 0.008));
  const auto d = ratio_ci_bootstrap(twice, m, 0.05, 10000, 1);
  CHECK(d.lower == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(d.upper == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_FALSE(d.includes_one());
}

TEST_CASE("ratio CI is seed-deterministic and roughly reciprocal under swapping") {
  std::mt19937_64 rng(2);
  const auto m = noisy_forks(rng, 5, 40, 1.0);
  const auto s = noisy_forks(rng, 5, 40, 1.1);
  const auto a = ratio_ci_bootstrap(m, s, 0.05, 10000, 77);
  CHECK(a == ratio_ci_bootstrap(m, s, 0.05, 10000, 77));
  CHECK_FALSE(a == ratio_ci_bootstrap(m, s, 0.05, 10000, 78));
  CHECK(a.center == doctest::Approx((a.lower + a.upper) / 2.0));

  const auto b = ratio_ci_bootstrap(s, m, 0.05, 10000, 77);
  CHECK(1.0 / b.upper == doctest::Approx(a.lower).epsilon(0.01));
  CHECK(1.0 / b.lower == doctest::Approx(a.upper).epsilon(0.01));
}

TEST_CASE("ratio CI input checks") {
  const ForkGroups ok(2, std::vector<double>(5, 1.0));
  CHECK_THROWS_AS(ratio_ci_bootstrap({}, ok), DataError);
  CHECK_THROWS_AS(ratio_ci_bootstrap(ForkGroups{{}}, ok), DataError);
  CHECK_THROWS_AS(ratio_ci_bootstrap(ForkGroups{{1.0, -1.0}}, ok), DataError);
  CHECK_THROWS_AS(ratio_ci_bootstrap(ok, ok, 0.05, 500), ConfigError);
}

TEST_CASE("relative deviation and testing time") {
  CHECK(relative_deviation(ci(1.04, 1.06)) == doctest::Approx(5.0));
  CHECK(relative_deviation(ci(0.98, 1.02)) == doctest::Approx(0.0));
  CHECK(relative_deviation(ci(1.10, 1.30)) == doctest::Approx(20.0));
  CHECK(testing_time(136, 100, 1.0, 1) == 236.0);
  CHECK(testing_time(0, 0, 1.0, 1) == 0.0);
  CHECK(testing_time(500, 100, 1.0, 1) == 600.0);
  CHECK(testing_time(10, 20, 0.5, 3) == 45.0);
}

TEST_CASE("classification metrics") {
  const auto truth = labels(10, 10);
  const auto perfect = classification_metrics(truth, truth);
  CHECK(*perfect.precision == 1.0);
  CHECK(*perfect.recall == 1.0);
  CHECK(*perfect.f1 == 1.0);
  CHECK(*perfect.balanced_accuracy == 1.0);

  // 9 of 10 stable and 5 of 10 unstable correct.
  std::vector<Label> pred = truth;
  pred[0] = Label::Unstable;
  for (int i = 10; i < 15; ++i) pred[i] = Label::Stable;
  const auto m = classification_metrics(pred, truth);
  CHECK(*m.recall == doctest::Approx(0.9));
  CHECK(*m.recall_unstable == doctest::Approx(0.5));
  CHECK(*m.balanced_accuracy == doctest::Approx(0.7));
  CHECK(*m.precision == doctest::Approx(9.0 / 14.0));
  CHECK(*m.f1 == doctest::Approx(2.0 * (9.0 / 14.0) * 0.9 / (9.0 / 14.0 + 0.9)));

  // Predicting Unstable everywhere leaves precision undefined.
  const auto none = classification_metrics(labels(0, 20), truth);
  CHECK_FALSE(none.precision.has_value());
  CHECK_FALSE(none.f1.has_value());
  CHECK(*none.recall == 0.0);
  CHECK(*none.balanced_accuracy == 0.5);

  CHECK_THROWS_AS(classification_metrics(labels(3, 0), labels(3, 0)), DataError);
  CHECK_THROWS_AS(classification_metrics(std::vector<Label>{}, std::vector<Label>{}), DataError);
}

TEST_CASE("stable recall 0.932 and balanced accuracy 0.682 imply unstable recall 0.432") {
  // 932 of 1000 stable and 432 of 1000 unstable windows correct.
  auto truth = labels(1000, 1000);
  auto pred = truth;
  for (int i = 932; i < 1000; ++i) pred[i] = Label::Unstable;
  for (int i = 1432; i < 2000; ++i) pred[i] = Label::Stable;
  const auto m = classification_metrics(pred, truth);
  CHECK(*m.recall == doctest::Approx(0.932));
  CHECK(*m.balanced_accuracy == doctest::Approx(0.682));
  CHECK(*m.recall_unstable == doctest::Approx(0.432));
}

TEST_CASE("Wilcoxon signed-rank fixtures") {
  std::vector<double> positive(10);
  for (int i = 0; i < 10; ++i) positive[i] = i + 1.0;
  CHECK(wilcoxon_signed_rank(positive) == doctest::Approx(2.0 / 1024.0));
  CHECK(wilcoxon_signed_rank(std::vector<double>{3.0}) == 1.0);
  CHECK(wilcoxon_signed_rank(std::vector<double>{1, -1, 2, -2, 3, -3}) == doctest::Approx(1.0));
  CHECK(wilcoxon_signed_rank(std::vector<double>{0.0, 2.0, 0.0}) == 1.0);
  CHECK_THROWS_WITH_AS(wilcoxon_signed_rank(std::vector<double>{0.0, 0.0}), doctest::Contains("no information"),
                       DataError);
}

TEST_CASE("exact Wilcoxon equals sign enumeration") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> size(1, 12), value(-6, 6);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> d(size(rng));
    bool any = false;
    for (auto& x : d) {
      x = value(rng);  // small integers force ties and zeros
      any |= x != 0.0;
    }
    if (!any) d[0] = 1.0;
    CHECK(wilcoxon_signed_rank(d) == doctest::Approx(oracle::wilcoxon_enumerate(d)).epsilon(1e-12));
  }
}

TEST_CASE("normal approximation branch") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal(0.3, 1.0);
  std::vector<double> d(60);
  for (auto& x : d) x = normal(rng);
  const double p = wilcoxon_signed_rank(d);
  CHECK(p > 0.0);
  CHECK(p <= 1.0);
  std::vector<double> big(40, 1.0);
  CHECK(wilcoxon_signed_rank(big) < 1e-6);
}

TEST_CASE("Vargha-Delaney A12") {
  CHECK(vargha_delaney_a12(std::vector<double>{1, 2, 3, 5}, std::vector<double>{2, 3, 3, 4}) == 0.625);
  CHECK(vargha_delaney_a12(std::vector<double>{1, 1}, std::vector<double>{2, 2}) == 1.0);
  CHECK(vargha_delaney_a12(std::vector<double>{4, 4}, std::vector<double>{4, 4}) == 0.5);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> a(20), b(20);
    for (int i = 0; i < 20; ++i) {
      a[i] = u(rng);
      b[i] = u(rng);
    }
    CHECK(vargha_delaney_a12(a, b) + vargha_delaney_a12(b, a) == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(vargha_delaney_a12(std::vector<double>{}, std::vector<double>{}), DataError);
}

TEST_CASE("rank-biserial correlation") {
  CHECK(rank_biserial(std::vector<double>{3, 1, -2}) == doctest::Approx(1.0 / 3.0));
  CHECK(rank_biserial(std::vector<double>{1, 2, 5}) == 1.0);
  CHECK(rank_biserial(std::vector<double>{2, -2, 7, -7}) == 0.0);
  CHECK_THROWS_AS(rank_biserial(std::vector<double>{0, 0}), DataError);

  const auto r = signed_ranks(std::vector<double>{3, 0, 1, -2, 1});
  CHECK(r.abs_ranks == std::vector<double>{4.0, 1.5, 3.0, 1.5});
  CHECK(r.w_plus == doctest::Approx(7.0));
}

TEST_CASE("compare_outcome rules") {
  auto outcome = [](RatioCI f, double ft, RatioCI b, double bt) {
    return compare_outcome({f, ft}, {b, bt}).category;
  };
  CHECK(outcome(ci(0.99, 1.01), 100, ci(1.04, 1.06), 100) == ComparisonCategory::ImprovedQuality);
  CHECK(outcome(ci(1.04, 1.06), 100, ci(0.99, 1.01), 100) == ComparisonCategory::RegressedQuality);
  CHECK(outcome(ci(0.99, 1.01), 74, ci(0.98, 1.02), 100) == ComparisonCategory::ImprovedTime);
  CHECK(outcome(ci(0.99, 1.01), 120, ci(0.98, 1.02), 100) == ComparisonCategory::RegressedTime);
  CHECK(outcome(ci(0.99, 1.01), 100, ci(0.98, 1.02), 100) == ComparisonCategory::NoChange);
  CHECK(outcome(ci(1.04, 1.06), 10, ci(1.1, 1.2), 100) == ComparisonCategory::NoChange);

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> lo(0.9, 1.1), width(0.0, 0.1), time(1.0, 100.0);
  for (int t = 0; t < 1000; ++t) {
    const double a = lo(rng), b = lo(rng);
    const auto f = ci(a, a + width(rng)), s = ci(b, b + width(rng));
    const auto c = outcome(f, time(rng), s, time(rng));
    if (!f.includes_one() || !s.includes_one()) {
      CHECK(c != ComparisonCategory::ImprovedTime);
      CHECK(c != ComparisonCategory::RegressedTime);
    }
  }
}

TEST_CASE("quartiles") {
  const auto q = quartiles({4, 1, 3, 2, 5});
  CHECK(q.q1 == 2.0);
  CHECK(q.median == 3.0);
  CHECK(q.q3 == 4.0);
  CHECK_THROWS_AS(quartiles({}), DataError);
}
