#include "warmstop/segmentation.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "warmstop/rng.hpp"

namespace warmstop {

void SamplingConfig::validate() const {
  if (window < 2) throw ConfigError("window must be >= 2");
  if (per_class_per_series < 1) throw ConfigError("per_class_per_series must be >= 1");
  if (folds < 2) throw ConfigError("folds must be >= 2");
}

SamplingSteps sampling_steps(int n, int st, int per_class_per_series) {
  return {(st - 1) / per_class_per_series, (n - st) / per_class_per_series};
}

namespace {

LabeledSegment make_segment(const MeasurementSeries& series, int start, int window, Label label) {
  LabeledSegment item;
  item.segment.source = series.id;
  item.segment.start = start;
  const auto first = series.values.begin() + (start - 1);
  item.segment.values.assign(first, first + window);
  item.label = label;
  return item;
}

// Starts first, first+step, ... (at most `count`, all < limit). A zero step
// yields every distinct start in [first, limit) instead.
std::vector<int> evenly_spaced_starts(int first, int limit, int step, int count) {
  std::vector<int> starts;
  if (step >= 1) {
    for (int k = 0; k < count; ++k) {
      const int s = first + k * step;
      if (s >= limit) break;
      starts.push_back(s);
    }
  } else {
    for (int s = first; s < limit && static_cast<int>(starts.size()) < count; ++s) starts.push_back(s);
  }
  return starts;
}

}  // namespace

std::vector<LabeledSegment> sample_segments(const MeasurementSeries& series, const SteadyStateAnnotation& annotation,
                                            const SamplingConfig& config) {
  config.validate();
  if (!annotation.reached()) throw DataError("no steady state");
  const int n = static_cast<int>(series.values.size());
  const int st = *annotation.st;
  if (st < 1 || st > n) throw DataError("steady-state iteration out of range");

  const int w = config.window;
  const int per_class = config.per_class_per_series;
  const auto steps = sampling_steps(n, st, per_class);
  const int last_start = n - w + 1;  // windows past the end are dropped

  std::vector<LabeledSegment> out;
  for (int s : evenly_spaced_starts(1, st, steps.unstable, per_class)) {
    if (s <= last_start) out.push_back(make_segment(series, s, w, Label::Unstable));
  }
  for (int s : evenly_spaced_starts(st, n + 1, steps.stable, per_class)) {
    if (s <= last_start) out.push_back(make_segment(series, s, w, Label::Stable));
  }
  return out;
}

DatasetBuild build_dataset(const std::vector<MeasurementSeries>& corpus, const AnnotationMap& annotations,
                           const SamplingConfig& config) {
  config.validate();
  DatasetBuild build;
  for (const auto& series : corpus) {
    auto it = annotations.find(series.id);
    if (it == annotations.end()) {
      build.warnings.push_back(series.id.to_string() + ": missing annotation, skipped");
      ++build.series_skipped;
      continue;
    }
    if (!it->second.reached()) {
      build.warnings.push_back(series.id.to_string() + ": no steady state, skipped");
      ++build.series_skipped;
      continue;
    }
    auto items = sample_segments(series, it->second, config);
    std::move(items.begin(), items.end(), std::back_inserter(build.dataset.items));
    ++build.series_used;
  }
  return build;
}

SegmentDataset assign_folds(SegmentDataset dataset, const SamplingConfig& config) {
  config.validate();
  if (dataset.items.empty()) throw DataError("empty dataset");

  std::map<std::string, std::set<std::string>> by_project;
  std::set<std::string> seen;
  for (const auto& item : dataset.items) {
    const auto& id = item.segment.source;
    if (seen.insert(id.benchmark).second) by_project[id.project].insert(id.benchmark);
  }
  if (static_cast<int>(seen.size()) < config.folds) {
    throw DataError("fewer benchmarks (" + std::to_string(seen.size()) + ") than folds (" +
                    std::to_string(config.folds) + ")");
  }

  std::mt19937_64 rng(derive_seed(config.seed, "folds"));
  dataset.fold_assignment.clear();
  int next_fold = 0;
  for (const auto& [project, names] : by_project) {
    std::vector<std::string> order(names.begin(), names.end());
    std::shuffle(order.begin(), order.end(), rng);
    for (const auto& name : order) {
      dataset.fold_assignment[name] = next_fold;
      next_fold = (next_fold + 1) % config.folds;
    }
  }
  return dataset;
}

std::size_t count_label_violations(const SegmentDataset& dataset, const AnnotationMap& annotations) {
  std::size_t violations = 0;
  for (const auto& item : dataset.items) {
    auto it = annotations.find(item.segment.source);
    if (it == annotations.end() || !it->second.reached()) {
      ++violations;
      continue;
    }
    if (label_for_start(item.segment.start, *it->second.st) != item.label) ++violations;
  }
  return violations;
}

}  // namespace warmstop
