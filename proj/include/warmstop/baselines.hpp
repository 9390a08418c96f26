#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "warmstop/stopper.hpp"
#include "warmstop/types.hpp"

namespace warmstop {

// Developer-configured JMH settings for one benchmark.
struct SopEntry {
  int warmup_iterations = 0;
  int measurement_iterations = 0;
  int forks = 1;

  bool operator==(const SopEntry&) const = default;
};

// Keyed by fully-qualified benchmark name.
using SopConfig = std::map<std::string, SopEntry>;

StopResult sop_stop(const MeasurementSeries& series, const SopConfig& sop);

enum class HeuristicKind { CV, RCIW, KLD };

const char* to_string(HeuristicKind kind);
HeuristicKind heuristic_kind_from_string(const std::string& text);

struct HeuristicConfig {
  HeuristicKind kind = HeuristicKind::CV;
  int window = 100;
  int stability_run = 5;
  double threshold = 0.01;
  int bootstrap_iters = 1000;   // RCIW
  double ci_alpha = 0.05;       // RCIW
  int kde_grid_points = 128;    // KLD
  double density_floor = 1e-12; // KLD
  int cap = 500;
  std::uint64_t seed = 0;

  static HeuristicConfig defaults_for(HeuristicKind kind);
  void validate() const;
};

// Population coefficient of variation sd / mean.
double coefficient_of_variation(std::span<const double> values);

// (upper - lower) / mean of the percentile bootstrap interval of the mean.
struct BootstrapMeanCI {
  double lower = 0.0;
  double upper = 0.0;
  double mean = 0.0;
  double relative_width() const { return (upper - lower) / mean; }
};
BootstrapMeanCI bootstrap_mean_ci(std::span<const double> values, int resamples, double alpha, std::mt19937_64& rng);

// Silverman rule-of-thumb bandwidth (0 for a constant sample).
double silverman_bandwidth(std::span<const double> values);

// KL(P || Q) between Gaussian kernel density estimates of two samples on a
// shared grid spanning both.
double kde_kl_divergence(std::span<const double> p_sample, std::span<const double> q_sample, int grid_points = 128,
                         double density_floor = 1e-12);

// Stability metric over one window, dispatching on the heuristic kind.
double heuristic_metric(std::span<const double> window, const HeuristicConfig& config, std::mt19937_64& rng);

// Dynamic stoppage: check the metric over the last `window`
// measurements after every iteration and stop warm-up once the last
// `stability_run` checks agree. The returned window follows the warm-up.
StopResult heuristic_stop(const MeasurementSeries& series, const HeuristicConfig& config);

}  // namespace warmstop
