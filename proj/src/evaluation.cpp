#include "warmstop/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "warmstop/rng.hpp"

namespace warmstop {

double wee(int estimated_warmup, int st, double iteration_duration) {
  return std::abs(static_cast<double>(estimated_warmup + 1 - st)) * iteration_duration;
}

const char* to_string(EstimationCategory c) {
  switch (c) {
    case EstimationCategory::Underestimate: return "underestimate";
    case EstimationCategory::Overestimate: return "overestimate";
    case EstimationCategory::ExactMatch: return "exact";
  }
  return "unknown";
}

EstimationCategory estimation_category(int estimated_warmup, int st) {
  const int start = estimated_warmup + 1;
  if (start == st) return EstimationCategory::ExactMatch;
  return start < st ? EstimationCategory::Underestimate : EstimationCategory::Overestimate;
}

std::vector<double> hierarchical_bootstrap_means(const ForkGroups& groups, int resamples, std::uint64_t seed) {
  if (groups.empty()) throw DataError("bootstrap: empty group");
  for (const auto& g : groups) {
    if (g.empty()) throw DataError("bootstrap: empty group");
  }
  if (resamples < 1) throw ConfigError("bootstrap: resamples must be >= 1");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_fork(0, groups.size() - 1);
  std::vector<std::uniform_int_distribution<std::size_t>> pick_value;
  pick_value.reserve(groups.size());
  for (const auto& g : groups) pick_value.emplace_back(0, g.size() - 1);

  std::vector<double> means(resamples);
  for (auto& m : means) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t f = 0; f < groups.size(); ++f) {
      const auto chosen = pick_fork(rng);
      const auto& g = groups[chosen];
      auto& dist = pick_value[chosen];
      for (std::size_t i = 0; i < g.size(); ++i) sum += g[dist(rng)];
      count += g.size();
    }
    m = sum / static_cast<double>(count);
  }
  return means;
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

RatioCI ratio_ci_from_replicates(std::span<const double> numerator_means, std::span<const double> denominator_means,
                                 double alpha) {
  if (numerator_means.size() != denominator_means.size() || numerator_means.empty()) {
    throw std::invalid_argument("ratio CI: replicate counts differ or are empty");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("ratio CI: alpha must be in (0, 1)");
  std::vector<double> ratios(numerator_means.size());
  for (std::size_t i = 0; i < ratios.size(); ++i) ratios[i] = numerator_means[i] / denominator_means[i];
  std::sort(ratios.begin(), ratios.end());

  RatioCI ci;
  ci.alpha = alpha;
  ci.resamples = static_cast<int>(ratios.size());
  ci.lower = quantile_sorted(ratios, alpha / 2.0);
  ci.upper = quantile_sorted(ratios, 1.0 - alpha / 2.0);
  ci.center = 0.5 * (ci.lower + ci.upper);
  return ci;
}

RatioCI ratio_ci_bootstrap(const ForkGroups& m, const ForkGroups& m_star, double alpha, int resamples,
                           std::uint64_t seed) {
  if (resamples < 1000) throw ConfigError("ratio CI: at least 1000 resamples required");
  for (const auto* side : {&m, &m_star}) {
    for (const auto& g : *side) {
      for (double v : g) {
        if (!(v > 0.0) || !std::isfinite(v)) throw DataError("ratio CI: measurements must be positive and finite");
      }
    }
  }
  const auto num = hierarchical_bootstrap_means(m, resamples, derive_seed(seed, "ratio-numerator"));
  const auto den = hierarchical_bootstrap_means(m_star, resamples, derive_seed(seed, "ratio-denominator"));
  return ratio_ci_from_replicates(num, den, alpha);
}

double relative_deviation(const RatioCI& ci) { return std::abs(ci.center - 1.0) * 100.0; }

double testing_time(int warmup_iterations, int measurement_iterations, double iteration_duration, int forks) {
  return static_cast<double>(warmup_iterations + measurement_iterations) * iteration_duration * forks;
}

ClassificationMetrics classification_metrics(std::span<const Label> predictions, std::span<const Label> truths) {
  if (predictions.size() != truths.size()) throw std::invalid_argument("classification_metrics: size mismatch");
  if (truths.empty()) throw DataError("classification_metrics: no predictions");

  ClassificationMetrics m;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const bool pred = predictions[i] == Label::Stable;
    const bool truth = truths[i] == Label::Stable;
    if (pred && truth) ++m.tp;
    else if (pred && !truth) ++m.fp;
    else if (!pred && truth) ++m.fn;
    else ++m.tn;
  }
  if (m.tp + m.fn == 0 || m.tn + m.fp == 0) throw DataError("classification_metrics: both classes must be present");

  auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  m.precision = ratio(m.tp, m.tp + m.fp);
  m.recall = ratio(m.tp, m.tp + m.fn);
  m.recall_unstable = ratio(m.tn, m.tn + m.fp);
  if (m.precision && m.recall && *m.precision + *m.recall > 0.0) {
    m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
  }
  m.balanced_accuracy = 0.5 * (*m.recall + *m.recall_unstable);
  return m;
}

SignedRanks signed_ranks(std::span<const double> paired_diffs) {
  std::vector<double> nonzero;
  for (double d : paired_diffs) {
    if (!std::isfinite(d)) throw DataError("signed ranks: non-finite difference");
    if (d != 0.0) nonzero.push_back(d);
  }
  if (nonzero.empty()) throw DataError("no information: all differences are zero");

  std::vector<std::size_t> order(nonzero.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::abs(nonzero[a]) < std::abs(nonzero[b]); });

  SignedRanks out;
  out.abs_ranks.resize(nonzero.size());
  out.positive.resize(nonzero.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && std::abs(nonzero[order[j + 1]]) == std::abs(nonzero[order[i]])) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) out.abs_ranks[order[k]] = avg;
    i = j + 1;
  }
  for (std::size_t i = 0; i < nonzero.size(); ++i) {
    out.positive[i] = nonzero[i] > 0.0;
    if (out.positive[i]) out.w_plus += out.abs_ranks[i];
  }
  return out;
}

double wilcoxon_signed_rank(std::span<const double> paired_diffs) {
  const auto ranks = signed_ranks(paired_diffs);
  const auto n = ranks.abs_ranks.size();

  if (n <= 25) {
    // Doubled average ranks are integers; count subsets by their sum.
    std::vector<long> doubled(n);
    long total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      doubled[i] = std::lround(2.0 * ranks.abs_ranks[i]);
      total += doubled[i];
    }
    std::vector<double> ways(total + 1, 0.0);
    ways[0] = 1.0;
    long reach = 0;
    for (long r : doubled) {
      for (long s = reach; s >= 0; --s) {
        if (ways[s] != 0.0) ways[s + r] += ways[s];
      }
      reach += r;
    }
    const long observed = std::lround(2.0 * ranks.w_plus);
    double below = 0.0, above = 0.0, all = 0.0;
    for (long s = 0; s <= total; ++s) {
      all += ways[s];
      if (s <= observed) below += ways[s];
      if (s >= observed) above += ways[s];
    }
    return std::min(1.0, 2.0 * std::min(below, above) / all);
  }

  const double nn = static_cast<double>(n);
  const double mean = nn * (nn + 1.0) / 4.0;
  double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0;
  std::vector<double> sorted = ranks.abs_ranks;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    var -= (t * t * t - t) / 48.0;
    i = j;
  }
  if (!(var > 0.0)) return 1.0;
  const double z = std::max(0.0, std::abs(ranks.w_plus - mean) - 0.5) / std::sqrt(var);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

double vargha_delaney_a12(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("a12: paired samples differ in length");
  if (a.empty()) throw DataError("a12: no pairs");
  double score = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) score += 1.0;
    else if (a[i] == b[i]) score += 0.5;
  }
  return score / static_cast<double>(a.size());
}

double rank_biserial(std::span<const double> paired_diffs) {
  const auto ranks = signed_ranks(paired_diffs);
  double favourable = 0.0, unfavourable = 0.0;
  for (std::size_t i = 0; i < ranks.abs_ranks.size(); ++i) {
    (ranks.positive[i] ? favourable : unfavourable) += ranks.abs_ranks[i];
  }
  return (favourable - unfavourable) / (favourable + unfavourable);
}

const char* to_string(ComparisonCategory c) {
  switch (c) {
    case ComparisonCategory::ImprovedQuality: return "improved_quality";
    case ComparisonCategory::RegressedQuality: return "regressed_quality";
    case ComparisonCategory::ImprovedTime: return "improved_time";
    case ComparisonCategory::RegressedTime: return "regressed_time";
    case ComparisonCategory::NoChange: return "no_change";
  }
  return "unknown";
}

ComparisonOutcome compare_outcome(const MethodOutcome& framework, const MethodOutcome& baseline) {
  ComparisonOutcome out{ComparisonCategory::NoChange, framework, baseline};
  const bool f_ok = framework.ci.includes_one();
  const bool b_ok = baseline.ci.includes_one();
  if (f_ok && !b_ok) {
    out.category = ComparisonCategory::ImprovedQuality;
  } else if (!f_ok && b_ok) {
    out.category = ComparisonCategory::RegressedQuality;
  } else if (f_ok && b_ok) {
    if (framework.testing_time < baseline.testing_time) out.category = ComparisonCategory::ImprovedTime;
    else if (framework.testing_time > baseline.testing_time) out.category = ComparisonCategory::RegressedTime;
  }
  return out;
}

Quartiles quartiles(std::vector<double> values) {
  if (values.empty()) throw DataError("quartiles: empty input");
  std::sort(values.begin(), values.end());
  return {quantile_sorted(values, 0.25), quantile_sorted(values, 0.5), quantile_sorted(values, 0.75)};
}

}  // namespace warmstop
