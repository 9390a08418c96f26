#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "warmstop/types.hpp"

namespace warmstop {

struct RocketModel;

struct ClassifierHandle {
  std::function<Label(std::span<const double>)> predict;
  std::string descriptor;
};

ClassifierHandle make_classifier(const RocketModel& model, std::string descriptor);

struct StopConfig {
  int window = 100;
  int max_warmup_iterations = 500;

  void validate() const;
};

enum class HaltReason { ModelStable, CapReached, SeriesExhausted, Fixed };

const char* to_string(HaltReason reason);
HaltReason halt_reason_from_string(const std::string& text);

struct StopResult {
  int warmup_iterations = 0;          // iterations preceding the returned window
  std::vector<double> measurements;   // values[warmup + 1 .. warmup + W] (1-based)
  HaltReason halt_reason = HaltReason::CapReached;
  int queries = 0;                    // classifier (or stability check) invocations

  bool operator==(const StopResult&) const = default;
};

// Slides a W-wide window one iteration at a time and halts at the first
// window the classifier calls Stable, or once the cap is reached.
StopResult run_stopper(const MeasurementSeries& series, const ClassifierHandle& classifier, const StopConfig& config);

struct StopRecord {
  BenchmarkId id;
  StopResult result;
  std::string classifier;  // descriptor of the classifier that produced it
};

// Replays every series with the fold model that excludes its benchmark:
// fold_models[f] must have been trained without fold f.
std::vector<StopRecord> run_corpus(const std::vector<MeasurementSeries>& corpus,
                                   const std::map<std::string, int>& fold_map,
                                   const std::vector<ClassifierHandle>& fold_models, const StopConfig& config);

}  // namespace warmstop
