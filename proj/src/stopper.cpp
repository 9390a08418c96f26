#include "warmstop/stopper.hpp"

#include "warmstop/rocket.hpp"

namespace warmstop {

void StopConfig::validate() const {
  if (window < 2) throw ConfigError("window must be >= 2");
  if (max_warmup_iterations < 0) throw ConfigError("max_warmup_iterations must be >= 0");
}

const char* to_string(HaltReason reason) {
  switch (reason) {
    case HaltReason::ModelStable: return "model_stable";
    case HaltReason::CapReached: return "cap_reached";
    case HaltReason::SeriesExhausted: return "series_exhausted";
    case HaltReason::Fixed: return "fixed";
  }
  return "unknown";
}

HaltReason halt_reason_from_string(const std::string& text) {
  if (text == "model_stable") return HaltReason::ModelStable;
  if (text == "cap_reached") return HaltReason::CapReached;
  if (text == "series_exhausted") return HaltReason::SeriesExhausted;
  if (text == "fixed") return HaltReason::Fixed;
  throw DataError("unknown halt reason '" + text + "'");
}

ClassifierHandle make_classifier(const RocketModel& model, std::string descriptor) {
  return {[&model](std::span<const double> window) { return predict(model, window); }, std::move(descriptor)};
}

StopResult run_stopper(const MeasurementSeries& series, const ClassifierHandle& classifier, const StopConfig& config) {
  config.validate();
  if (!classifier.predict) throw std::invalid_argument("run_stopper: classifier has no predict function");
  const int n = static_cast<int>(series.values.size());
  const int w = config.window;
  if (n < w) throw DataError(series.id.to_string() + ": series shorter than the measurement window");

  const std::span<const double> values(series.values);
  auto finish = [&](int warmup, HaltReason reason, int queries) {
    StopResult r;
    r.warmup_iterations = warmup;
    r.measurements.assign(values.begin() + warmup, values.begin() + warmup + w);
    r.halt_reason = reason;
    r.queries = queries;
    return r;
  };

  const int last_feasible = n - w;
  int queries = 0;
  for (int warmup = 0; warmup <= config.max_warmup_iterations; ++warmup) {
    if (warmup > last_feasible) return finish(last_feasible, HaltReason::SeriesExhausted, queries);
    ++queries;
    if (classifier.predict(values.subspan(warmup, w)) == Label::Stable) {
      return finish(warmup, HaltReason::ModelStable, queries);
    }
  }
  return finish(config.max_warmup_iterations, HaltReason::CapReached, queries);
}

std::vector<StopRecord> run_corpus(const std::vector<MeasurementSeries>& corpus,
                                   const std::map<std::string, int>& fold_map,
                                   const std::vector<ClassifierHandle>& fold_models, const StopConfig& config) {
  std::vector<StopRecord> records;
  records.reserve(corpus.size());
  for (const auto& series : corpus) {
    auto it = fold_map.find(series.id.benchmark);
    if (it == fold_map.end()) throw DataError("benchmark '" + series.id.benchmark + "' missing from fold map");
    const int fold = it->second;
    if (fold < 0 || fold >= static_cast<int>(fold_models.size()) || !fold_models[fold].predict) {
      throw DataError("missing fold model " + std::to_string(fold) + " for benchmark '" + series.id.benchmark + "'");
    }
    const auto& classifier = fold_models[fold];
    records.push_back({series.id, run_stopper(series, classifier, config), classifier.descriptor});
  }
  return records;
}

}  // namespace warmstop
