#include "warmstop/steady_state.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <limits>
#include <numbers>

#include "warmstop/core_data.hpp"

namespace warmstop {

double SteadyStateConfig::penalty_for(std::size_t n) const {
  if (penalty) return *penalty;
  return 15.0 * std::log(static_cast<double>(std::max<std::size_t>(n, 2)));
}

void SteadyStateConfig::validate() const {
  if (penalty && !(*penalty > 0.0)) throw ConfigError("penalty must be positive");
  if (min_segment_length < 2) throw ConfigError("min_segment_length must be >= 2");
  if (!std::isfinite(equivalence_rel_tol) || equivalence_rel_tol <= 0.0)
    throw ConfigError("equivalence_rel_tol must be positive and finite");
  if (!std::isfinite(equivalence_abs_tol) || equivalence_abs_tol < 0.0)
    throw ConfigError("equivalence_abs_tol must be non-negative and finite");
  if (tail_exclusion < 0) throw ConfigError("tail_exclusion must be >= 0");
  if (!(variance_floor > 0.0)) throw ConfigError("variance_floor must be positive");
}

GaussianMeanVarCost::GaussianMeanVarCost(std::span<const double> values, double variance_floor)
    : prefix_(values.size() + 1, 0.0), prefix_sq_(values.size() + 1, 0.0), floor_(variance_floor) {
  const auto n = values.size();
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(std::max<std::size_t>(n, 1));
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  double scale = std::sqrt(ss / static_cast<double>(std::max<std::size_t>(n, 1)));
  if (!(scale > 0.0)) scale = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (values[i] - mean) / scale;
    prefix_[i + 1] = prefix_[i] + x;
    prefix_sq_[i + 1] = prefix_sq_[i] + x * x;
  }
}

double GaussianMeanVarCost::operator()(int begin, int end) const {
  const double len = static_cast<double>(end - begin);
  const double sum = prefix_[end] - prefix_[begin];
  const double sse = std::max(0.0, (prefix_sq_[end] - prefix_sq_[begin]) - sum * sum / len);
  const double var = std::max(sse / len, floor_);
  return len * (std::log(2.0 * std::numbers::pi) + std::log(var)) + sse / var;
}

std::vector<SegmentStats> segment_stats(std::span<const double> values, const std::vector<int>& changepoints) {
  std::vector<SegmentStats> out;
  const int n = static_cast<int>(values.size());
  int begin = 0;
  auto emit = [&](int end) {
    SegmentStats s;
    s.start = begin + 1;
    s.end = end;
    double mean = 0.0;
    for (int i = begin; i < end; ++i) mean += values[i];
    mean /= (end - begin);
    double ss = 0.0;
    for (int i = begin; i < end; ++i) ss += (values[i] - mean) * (values[i] - mean);
    s.mean = mean;
    s.variance = ss / (end - begin);
    out.push_back(s);
    begin = end;
  };
  for (int cp : changepoints) emit(cp);
  if (begin < n) emit(n);
  return out;
}

ChangePointResult pelt_changepoints(std::span<const double> values, const SteadyStateConfig& config) {
  config.validate();
  const int n = static_cast<int>(values.size());
  const int m = config.min_segment_length;
  if (n < 2 * m) throw DataError("insufficient data");
  for (double v : values) {
    if (!std::isfinite(v)) throw DataError("pelt_changepoints: non-finite value");
  }

  const GaussianMeanVarCost cost(values, config.variance_floor);
  const double beta = config.penalty_for(values.size());

  ChangePointResult result;
  if (!std::isfinite(beta)) {
    result.segments = segment_stats(values, {});
    result.cost = cost(0, n);
    return result;
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> best(n + 1, kInf);
  std::vector<int> last_change(n + 1, 0);
  std::vector<int> prune_from(n + 1, INT_MAX);
  best[0] = -beta;

  std::vector<int> candidates{0};
  std::vector<double> partial;  // best[s] + cost(s, t) for eligible s
  for (int t = m; t <= n; ++t) {
    std::erase_if(candidates, [&](int s) { return prune_from[s] <= t; });

    partial.assign(candidates.size(), kInf);
    double best_t = kInf;
    int arg = 0;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      const int s = candidates[k];
      if (t - s < m) continue;
      partial[k] = best[s] + cost(s, t);
      if (partial[k] + beta < best_t) {
        best_t = partial[k] + beta;
        arg = s;
      }
    }
    best[t] = best_t;
    last_change[t] = arg;

    // A candidate that is already worse than the optimum at t can only be
    // discarded once a segment of minimum length fits after t.
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      if (partial[k] < kInf && partial[k] > best_t) {
        const int s = candidates[k];
        prune_from[s] = std::min(prune_from[s], t + m);
      }
    }
    candidates.push_back(t);
  }

  std::vector<int> cps;
  for (int cur = n; last_change[cur] > 0; cur = last_change[cur]) cps.push_back(last_change[cur]);
  std::reverse(cps.begin(), cps.end());

  result.changepoints = std::move(cps);
  result.segments = segment_stats(values, result.changepoints);
  result.cost = best[n];
  return result;
}

ChangePointResult pelt_changepoints(const MeasurementSeries& series, const SteadyStateConfig& config) {
  return pelt_changepoints(std::span<const double>(series.values), config);
}

SteadyStateAnnotation classify_steady_state(const MeasurementSeries& series, const ChangePointResult& cps,
                                            const SteadyStateConfig& config) {
  const auto& segs = cps.segments;
  if (segs.empty()) throw std::invalid_argument("classify_steady_state: empty segmentation");
  const int n = static_cast<int>(series.values.size());
  if (segs.back().end != n) throw std::invalid_argument("classify_steady_state: segmentation does not match series");

  const auto& final_seg = segs.back();
  const double tol = std::max(config.equivalence_abs_tol, config.equivalence_rel_tol * std::abs(final_seg.mean));
  std::size_t earliest = segs.size() - 1;
  while (earliest > 0 && std::abs(segs[earliest - 1].mean - final_seg.mean) <= tol) --earliest;

  const int st = segs[earliest].start;
  if (st > n - config.tail_exclusion) return SteadyStateAnnotation::never();
  return SteadyStateAnnotation::at(st);
}

SteadyStateAnnotation annotate_series(const MeasurementSeries& series, const SteadyStateConfig& config) {
  const auto report = validate_series(series);
  if (!report.valid()) throw DataError(series.id.to_string() + ": " + report.summary());
  return classify_steady_state(series, pelt_changepoints(series, config), config);
}

AnnotationBatch annotate_corpus(const std::vector<MeasurementSeries>& corpus, const SteadyStateConfig& config) {
  config.validate();
  AnnotationBatch batch;
  for (const auto& series : corpus) {
    try {
      batch.annotations.emplace(series.id, annotate_series(series, config));
    } catch (const std::exception& e) {
      batch.errors.emplace_back(series.id, e.what());
    }
  }
  return batch;
}

}  // namespace warmstop
