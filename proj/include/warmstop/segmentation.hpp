#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "warmstop/types.hpp"

namespace warmstop {

struct SamplingConfig {
  int window = 100;
  int per_class_per_series = 50;
  int folds = 5;
  std::uint64_t seed = 0;

  void validate() const;
};

// Step between consecutive window starts of one phase.
// Warm-up: floor((st - 1) / per_class); steady: floor((n - st) / per_class).
struct SamplingSteps {
  int unstable = 0;
  int stable = 0;
};
SamplingSteps sampling_steps(int n, int st, int per_class_per_series);

std::vector<LabeledSegment> sample_segments(const MeasurementSeries& series, const SteadyStateAnnotation& annotation,
                                            const SamplingConfig& config);

struct DatasetBuild {
  SegmentDataset dataset;
  std::vector<std::string> warnings;
  int series_used = 0;
  int series_skipped = 0;
};

DatasetBuild build_dataset(const std::vector<MeasurementSeries>& corpus, const AnnotationMap& annotations,
                           const SamplingConfig& config);

// Stratified by project: benchmarks are shuffled within each project and
// dealt round-robin, continuing the deal position across projects.
SegmentDataset assign_folds(SegmentDataset dataset, const SamplingConfig& config);

// Counts label/annotation disagreements (expected to be zero).
std::size_t count_label_violations(const SegmentDataset& dataset, const AnnotationMap& annotations);

}  // namespace warmstop
