#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "warmstop/baselines.hpp"
#include "warmstop/evaluation.hpp"
#include "warmstop/rocket.hpp"
#include "warmstop/types.hpp"

namespace warmstop {

// How many measurement iterations and forks each method is charged for.
// With an SOP table the developer settings are used for every method.
struct MeasurementPlan {
  std::optional<SopConfig> sop;
  int default_measurement = 100;

  int measurement_for(const std::string& benchmark) const;
  std::optional<int> forks_for(const std::string& benchmark) const;
};

struct BootstrapSettings {
  double alpha = 0.05;
  int resamples = 10000;
  std::uint64_t seed = 0;
};

struct SeriesEval {
  std::string method;
  BenchmarkId id;
  int st = 1;
  int warmup = 0;
  double wee_s = 0.0;
  EstimationCategory category = EstimationCategory::ExactMatch;
};

struct BenchmarkEval {
  std::string method;
  std::string project;
  std::string benchmark;
  double wee_s = 0.0;  // mean over evaluated forks
  RatioCI ci;
  double rel_dev_pct = 0.0;
  double testing_time_s = 0.0;
  int forks_used = 0;
  int measurement_iterations = 0;
};

struct MethodEvaluation {
  std::string method;
  std::vector<SeriesEval> series;
  std::vector<BenchmarkEval> benchmarks;
  std::vector<std::string> warnings;
};

// Replicate means of M* per benchmark; shared across methods so every
// method is compared against the same resampled steady state.
class SteadyStateReplicates {
 public:
  const std::vector<double>& get(const std::string& benchmark, const ForkGroups& m_star,
                                 const BootstrapSettings& settings);

 private:
  std::map<std::string, std::vector<double>> cache_;
};

// Series that never reach a steady state are excluded, as are their forks
// from M and M*.
MethodEvaluation evaluate_method(const std::string& method, const std::vector<MeasurementSeries>& corpus,
                                 const AnnotationMap& annotations, const std::map<BenchmarkId, int>& warmups,
                                 const MeasurementPlan& plan, const BootstrapSettings& settings,
                                 SteadyStateReplicates* replicates = nullptr);

struct EvaluationSummary {
  std::string method;
  std::size_t series = 0;
  std::size_t benchmarks = 0;
  Quartiles rel_dev_pct;
  Quartiles testing_time_s;
  double pct_overestimate = 0.0;
  double pct_underestimate = 0.0;
  double pct_exact = 0.0;
};

EvaluationSummary summarize(const MethodEvaluation& eval);

struct WeeComparison {
  std::string framework;
  std::string baseline;
  std::size_t pairs = 0;
  std::optional<double> p_value;  // absent when every pair ties
  double a12 = 0.5;
  std::optional<double> r;
};

// Paired per-series WEE: favourable means a lower framework WEE.
WeeComparison compare_wee(const MethodEvaluation& framework, const MethodEvaluation& baseline);

struct ImprovementSummary {
  std::string framework;
  std::string baseline;
  std::size_t benchmarks = 0;
  double improved_quality_pct = 0.0;
  double improved_time_pct = 0.0;
  double regressed_quality_pct = 0.0;
  double regressed_time_pct = 0.0;
  double total_improved_pct() const { return improved_quality_pct + improved_time_pct; }
  double total_regressed_pct() const { return regressed_quality_pct + regressed_time_pct; }
  double net_pct() const { return total_improved_pct() - total_regressed_pct(); }
  std::vector<std::pair<std::string, ComparisonOutcome>> outcomes;
};

ImprovementSummary compare_benchmarks(const MethodEvaluation& framework, const MethodEvaluation& baseline);

struct ClassificationRow {
  std::string model;
  ClassificationMetrics metrics;
};

// Per-fold metrics averaged over folds.
ClassificationMetrics average_fold_metrics(const std::vector<FoldPrediction>& predictions, int folds);

// ---- persistence of evaluation artifacts -------------------------------

void write_method_evaluation(const std::filesystem::path& dir, const MethodEvaluation& eval, std::uint64_t seed);
MethodEvaluation read_method_evaluation(const std::filesystem::path& dir);

void write_cv_predictions(const std::filesystem::path& path, const SegmentDataset& dataset,
                          const std::vector<FoldPrediction>& predictions, std::uint64_t seed);
std::vector<FoldPrediction> read_cv_predictions(const std::filesystem::path& path);

// Summary tables.
void write_classification_table(const std::filesystem::path& path, const std::vector<ClassificationRow>& rows);
void write_wee_table(const std::filesystem::path& path, const std::vector<WeeComparison>& rows);
void write_improvement_table(const std::filesystem::path& path, const std::vector<ImprovementSummary>& rows);
void write_deviation_time_table(const std::filesystem::path& path, const std::vector<EvaluationSummary>& rows);
void write_estimation_table(const std::filesystem::path& path, const std::vector<EvaluationSummary>& rows);
void write_outcomes(const std::filesystem::path& path, const ImprovementSummary& summary);

}  // namespace warmstop
