#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "warmstop/types.hpp"

namespace warmstop {

// ---- warm-up estimation -------------------------------------------------

// |(estimated_warmup + 1) - st| * iteration_duration: the returned window
// starts right after the estimated warm-up.
double wee(int estimated_warmup, int st, double iteration_duration);

enum class EstimationCategory { Underestimate, Overestimate, ExactMatch };
const char* to_string(EstimationCategory c);
EstimationCategory estimation_category(int estimated_warmup, int st);

// ---- measurement deviation ----------------------------------------------

using ForkGroups = std::vector<std::vector<double>>;

struct RatioCI {
  double lower = 1.0;
  double upper = 1.0;
  double center = 1.0;  // midpoint of (lower, upper)
  double alpha = 0.05;
  int resamples = 10000;

  bool includes_one() const { return lower <= 1.0 && 1.0 <= upper; }
  bool operator==(const RatioCI&) const = default;
};

// Pooled means of two-level bootstrap replicates: forks are drawn with
// replacement, then iterations within each drawn fork.
std::vector<double> hierarchical_bootstrap_means(const ForkGroups& groups, int resamples, std::uint64_t seed);

RatioCI ratio_ci_from_replicates(std::span<const double> numerator_means, std::span<const double> denominator_means,
                                 double alpha);

// Percentile CI of mean(M) / mean(M*) under hierarchical resampling. M and
// M* use independent streams derived from `seed`.
RatioCI ratio_ci_bootstrap(const ForkGroups& m, const ForkGroups& m_star, double alpha = 0.05,
                           int resamples = 10000, std::uint64_t seed = 0);

// |center - 1| * 100.
double relative_deviation(const RatioCI& ci);

// (warmup + measurement) * duration * forks.
double testing_time(int warmup_iterations, int measurement_iterations, double iteration_duration, int forks);

// ---- classification -----------------------------------------------------

struct ClassificationMetrics {
  std::optional<double> precision;
  std::optional<double> recall;  // recall of Stable (the positive class)
  std::optional<double> f1;
  std::optional<double> recall_unstable;
  std::optional<double> balanced_accuracy;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

ClassificationMetrics classification_metrics(std::span<const Label> predictions, std::span<const Label> truths);

// ---- paired comparisons -------------------------------------------------

// Two-sided p-value. Zero differences are dropped, tied magnitudes share
// average ranks; exact null distribution up to 25 non-zero pairs, normal
// approximation with tie and continuity correction above.
double wilcoxon_signed_rank(std::span<const double> paired_diffs);

// Sum of ranks of positive differences, and the ranks themselves.
struct SignedRanks {
  std::vector<double> abs_ranks;  // average ranks of |d| over non-zero d
  std::vector<bool> positive;
  double w_plus = 0.0;
};
SignedRanks signed_ranks(std::span<const double> paired_diffs);

// Fraction of pairs where a < b, ties counting one half.
double vargha_delaney_a12(std::span<const double> a, std::span<const double> b);

// Matched-pairs rank-biserial correlation of differences (positive =
// favourable).
double rank_biserial(std::span<const double> paired_diffs);

enum class ComparisonCategory { ImprovedQuality, RegressedQuality, ImprovedTime, RegressedTime, NoChange };
const char* to_string(ComparisonCategory c);

struct MethodOutcome {
  RatioCI ci;
  double testing_time = 0.0;
};

struct ComparisonOutcome {
  ComparisonCategory category = ComparisonCategory::NoChange;
  MethodOutcome framework;
  MethodOutcome baseline;
};

// Quality first: exactly one of the CIs includes 1. Time only when both do.
ComparisonOutcome compare_outcome(const MethodOutcome& framework, const MethodOutcome& baseline);

// ---- descriptive --------------------------------------------------------

struct Quartiles {
  double q1 = 0.0, median = 0.0, q3 = 0.0;
};
Quartiles quartiles(std::vector<double> values);

}  // namespace warmstop
