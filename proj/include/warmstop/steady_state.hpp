#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "warmstop/types.hpp"

namespace warmstop {

struct SegmentStats {
  int start = 1;  // 1-based, inclusive
  int end = 1;    // 1-based, inclusive
  double mean = 0.0;
  double variance = 0.0;  // population variance of the raw values

  int length() const { return end - start + 1; }
  bool operator==(const SegmentStats&) const = default;
};

struct ChangePointResult {
  // Last index (1-based) of every segment but the final one.
  std::vector<int> changepoints;
  std::vector<SegmentStats> segments;
  double cost = 0.0;  // penalised objective of the returned segmentation

  bool operator==(const ChangePointResult&) const = default;
};

struct SteadyStateConfig {
  std::optional<double> penalty;  // default: 15 * ln(n)
  int min_segment_length = 5;
  double equivalence_rel_tol = 0.05;
  double equivalence_abs_tol = 0.0;  // seconds
  int tail_exclusion = 100;
  double variance_floor = 1e-12;

  double penalty_for(std::size_t n) const;
  void validate() const;
};

// Penalised Gaussian (mean + variance change) segment cost. The series is
// centred and divided by its overall standard deviation first, so the
// variance floor is relative to the series' own spread.
class GaussianMeanVarCost {
 public:
  GaussianMeanVarCost(std::span<const double> values, double variance_floor);

  // Twice the negative log-likelihood of values[begin, end) (0-based,
  // half-open) at the floored maximum-likelihood mean and variance.
  double operator()(int begin, int end) const;
  int size() const { return static_cast<int>(prefix_.size()) - 1; }

 private:
  std::vector<double> prefix_;
  std::vector<double> prefix_sq_;
  double floor_;
};

// Optimal penalised segmentation by PELT (pruned exact search).
ChangePointResult pelt_changepoints(const MeasurementSeries& series, const SteadyStateConfig& config);
ChangePointResult pelt_changepoints(std::span<const double> values, const SteadyStateConfig& config);

// Builds per-segment statistics from a list of changepoints.
std::vector<SegmentStats> segment_stats(std::span<const double> values, const std::vector<int>& changepoints);

// Backward walk from the final segment over equivalent-mean segments.
SteadyStateAnnotation classify_steady_state(const MeasurementSeries& series, const ChangePointResult& cps,
                                            const SteadyStateConfig& config);

SteadyStateAnnotation annotate_series(const MeasurementSeries& series, const SteadyStateConfig& config);

struct AnnotationBatch {
  AnnotationMap annotations;
  std::vector<std::pair<BenchmarkId, std::string>> errors;
};

AnnotationBatch annotate_corpus(const std::vector<MeasurementSeries>& corpus, const SteadyStateConfig& config);

}  // namespace warmstop
