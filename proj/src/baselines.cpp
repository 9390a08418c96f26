#include "warmstop/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

#include "warmstop/rng.hpp"

namespace warmstop {

const char* to_string(HeuristicKind kind) {
  switch (kind) {
    case HeuristicKind::CV: return "cv";
    case HeuristicKind::RCIW: return "rciw";
    case HeuristicKind::KLD: return "kld";
  }
  return "unknown";
}

HeuristicKind heuristic_kind_from_string(const std::string& text) {
  if (text == "cv") return HeuristicKind::CV;
  if (text == "rciw") return HeuristicKind::RCIW;
  if (text == "kld") return HeuristicKind::KLD;
  throw ConfigError("unknown heuristic '" + text + "'");
}

HeuristicConfig HeuristicConfig::defaults_for(HeuristicKind kind) {
  HeuristicConfig c;
  c.kind = kind;
  c.threshold = kind == HeuristicKind::KLD ? 0.05 : 0.01;
  return c;
}

void HeuristicConfig::validate() const {
  if (window < 2) throw ConfigError("heuristic window must be >= 2");
  if (stability_run < 1) throw ConfigError("stability_run must be >= 1");
  if (!std::isfinite(threshold) || threshold < 0.0) throw ConfigError("threshold must be finite and >= 0");
  if (bootstrap_iters < 1) throw ConfigError("bootstrap_iters must be >= 1");
  if (!(ci_alpha > 0.0 && ci_alpha < 1.0)) throw ConfigError("ci_alpha must be in (0, 1)");
  if (kde_grid_points < 2) throw ConfigError("kde_grid_points must be >= 2");
  if (cap < 0) throw ConfigError("cap must be >= 0");
}

StopResult sop_stop(const MeasurementSeries& series, const SopConfig& sop) {
  auto it = sop.find(series.id.benchmark);
  if (it == sop.end()) throw DataError("no SOP configuration for benchmark '" + series.id.benchmark + "'");
  const auto& cfg = it->second;
  if (cfg.warmup_iterations < 0 || cfg.measurement_iterations < 0 || cfg.forks < 0) {
    throw ConfigError("SOP counts must be >= 0");
  }
  const auto end = static_cast<std::size_t>(cfg.warmup_iterations) + cfg.measurement_iterations;
  if (end > series.values.size()) {
    throw DataError(series.id.to_string() + ": series too short for the configured SOP iterations");
  }
  StopResult r;
  r.warmup_iterations = cfg.warmup_iterations;
  r.measurements.assign(series.values.begin() + cfg.warmup_iterations, series.values.begin() + end);
  r.halt_reason = HaltReason::Fixed;
  r.queries = 0;
  return r;
}

double coefficient_of_variation(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("coefficient_of_variation: empty input");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (!(mean > 0.0)) throw DataError("coefficient_of_variation: non-positive mean");
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size())) / mean;
}

namespace {

// Linear interpolation between order statistics of a sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::vector<double> kde_on_grid(std::span<const double> sample, double bandwidth, const std::vector<double>& grid) {
  std::vector<double> density(grid.size(), 0.0);
  const double norm = 1.0 / (static_cast<double>(sample.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double acc = 0.0;
    for (double x : sample) {
      const double u = (grid[g] - x) / bandwidth;
      acc += std::exp(-0.5 * u * u);
    }
    density[g] = acc * norm;
  }
  return density;
}

}  // namespace

BootstrapMeanCI bootstrap_mean_ci(std::span<const double> values, int resamples, double alpha, std::mt19937_64& rng) {
  if (values.empty()) throw std::invalid_argument("bootstrap_mean_ci: empty input");
  const auto n = values.size();
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<double> means(resamples);
  for (auto& m : means) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += values[pick(rng)];
    m = acc / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  BootstrapMeanCI ci;
  double mean = 0.0;
  for (double v : values) mean += v;
  ci.mean = mean / static_cast<double>(n);
  ci.lower = std::min(quantile_sorted(means, alpha / 2.0), ci.mean);
  ci.upper = std::max(quantile_sorted(means, 1.0 - alpha / 2.0), ci.mean);
  return ci;
}

double silverman_bandwidth(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  const double sd = sample_sd(values);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = std::max(sd, iqr / 1.34);
  return 0.9 * spread * std::pow(static_cast<double>(values.size()), -0.2);
}

double kde_kl_divergence(std::span<const double> p_sample, std::span<const double> q_sample, int grid_points,
                         double density_floor) {
  if (p_sample.empty() || q_sample.empty()) throw std::invalid_argument("kde_kl_divergence: empty sample");
  if (grid_points < 2) throw std::invalid_argument("kde_kl_divergence: need at least 2 grid points");
  auto [pmin, pmax] = std::minmax_element(p_sample.begin(), p_sample.end());
  auto [qmin, qmax] = std::minmax_element(q_sample.begin(), q_sample.end());
  const double lo_data = std::min(*pmin, *qmin);
  const double hi_data = std::max(*pmax, *qmax);
  if (!(hi_data > lo_data)) return 0.0;  // both samples are the same constant

  const double data_step = (hi_data - lo_data) / (grid_points - 1);
  double hp = silverman_bandwidth(p_sample);
  double hq = silverman_bandwidth(q_sample);
  if (!(hp > 0.0)) hp = data_step;
  if (!(hq > 0.0)) hq = data_step;

  const double pad = 3.0 * std::max(hp, hq);
  const double lo = lo_data - pad;
  const double hi = hi_data + pad;
  std::vector<double> grid(grid_points);
  for (int g = 0; g < grid_points; ++g) grid[g] = lo + (hi - lo) * g / (grid_points - 1);

  auto p = kde_on_grid(p_sample, hp, grid);
  auto q = kde_on_grid(q_sample, hq, grid);
  double psum = 0.0, qsum = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    p[g] = std::max(p[g], density_floor);
    q[g] = std::max(q[g], density_floor);
    psum += p[g];
    qsum += q[g];
  }
  double kl = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double pg = p[g] / psum;
    const double qg = q[g] / qsum;
    kl += pg * std::log(pg / qg);
  }
  return std::max(kl, 0.0);
}

double heuristic_metric(std::span<const double> window, const HeuristicConfig& config, std::mt19937_64& rng) {
  switch (config.kind) {
    case HeuristicKind::CV: return coefficient_of_variation(window);
    case HeuristicKind::RCIW: {
      const auto ci = bootstrap_mean_ci(window, config.bootstrap_iters, config.ci_alpha, rng);
      if (!(ci.mean > 0.0)) throw DataError("rciw: non-positive mean");
      return ci.relative_width();
    }
    case HeuristicKind::KLD: {
      const auto half = window.size() / 2;
      return kde_kl_divergence(window.first(half), window.subspan(half), config.kde_grid_points,
                               config.density_floor);
    }
  }
  throw std::logic_error("heuristic_metric: unknown kind");
}

namespace {

bool run_is_stable(const std::deque<double>& recent, const HeuristicConfig& config) {
  if (config.kind == HeuristicKind::KLD) {
    const auto below = std::count_if(recent.begin(), recent.end(), [&](double v) { return v < config.threshold; });
    return static_cast<double>(below) / static_cast<double>(recent.size()) >= 1.0 - config.threshold;
  }
  const auto [mn, mx] = std::minmax_element(recent.begin(), recent.end());
  return *mx - *mn < config.threshold;
}

}  // namespace

StopResult heuristic_stop(const MeasurementSeries& series, const HeuristicConfig& config) {
  config.validate();
  const int n = static_cast<int>(series.values.size());
  const int w = config.window;
  if (n < 2 * w) throw DataError(series.id.to_string() + ": series too short for one heuristic check");
  if (config.kind != HeuristicKind::KLD) {
    for (double v : series.values) {
      if (!(v > 0.0)) throw DataError(series.id.to_string() + ": non-positive measurement");
    }
  }

  std::mt19937_64 rng(derive_seed(config.seed, series.id.to_string()));
  const std::span<const double> values(series.values);
  auto finish = [&](int warmup, HaltReason reason, int checks) {
    StopResult r;
    r.warmup_iterations = warmup;
    r.measurements.assign(values.begin() + warmup, values.begin() + warmup + w);
    r.halt_reason = reason;
    r.queries = checks;
    return r;
  };

  // `i` is the number of measurements observed so far.
  const int last = std::min(config.cap, n - w);
  std::deque<double> recent;
  int checks = 0;
  for (int i = w; i <= last; ++i) {
    recent.push_back(heuristic_metric(values.subspan(i - w, w), config, rng));
    ++checks;
    if (static_cast<int>(recent.size()) > config.stability_run) recent.pop_front();
    if (static_cast<int>(recent.size()) == config.stability_run && run_is_stable(recent, config)) {
      return finish(i, HaltReason::ModelStable, checks);
    }
  }
  if (last == config.cap) return finish(config.cap, HaltReason::CapReached, checks);
  return finish(last, HaltReason::SeriesExhausted, checks);
}

}  // namespace warmstop
