#include "warmstop/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "warmstop/rng.hpp"

namespace warmstop {

const char* to_string(WarmupShape shape) {
  switch (shape) {
    case WarmupShape::Decay: return "decay";
    case WarmupShape::Slowdown: return "slowdown";
    case WarmupShape::Oscillating: return "oscillating";
    case WarmupShape::Step: return "step";
  }
  return "unknown";
}

WarmupShape warmup_shape_from_string(const std::string& text) {
  if (text == "decay") return WarmupShape::Decay;
  if (text == "slowdown") return WarmupShape::Slowdown;
  if (text == "oscillating") return WarmupShape::Oscillating;
  if (text == "step") return WarmupShape::Step;
  throw ConfigError("unknown warm-up shape '" + text + "'");
}

void SyntheticSpec::validate() const {
  if (count < 1) throw ConfigError("synthetic: count must be >= 1");
  if (n < 2) throw ConfigError("synthetic: n must be >= 2");
  if (st_min < 1 || st_max < st_min) throw ConfigError("synthetic: need 1 <= st_min <= st_max");
  if (st_max >= n) throw ConfigError("synthetic: infeasible spec, st must be < n");
  if (!(steady_level > 0.0)) throw ConfigError("synthetic: steady_level must be positive");
  if (!(steady_level_spread >= 0.0 && steady_level_spread < 1.0))
    throw ConfigError("synthetic: steady_level_spread must be in [0, 1)");
  if (!(gap_min > 0.0 && gap_max >= gap_min)) throw ConfigError("synthetic: need 0 < gap_min <= gap_max");
  if (noise < 0.0 || warmup_noise_factor < 0.0 || fork_effect < 0.0) throw ConfigError("synthetic: negative noise");
  if (spike_probability < 0.0 || spike_probability > 1.0) throw ConfigError("synthetic: bad spike probability");
  if (min_level_length < 1 || max_level_length < min_level_length)
    throw ConfigError("synthetic: need 1 <= min_level_length <= max_level_length");
  if (shapes.empty()) throw ConfigError("synthetic: no warm-up shapes");
  if (forks < 1 || benchmarks_per_project < 1) throw ConfigError("synthetic: forks and benchmarks must be >= 1");
  if (!(iteration_duration > 0.0)) throw ConfigError("synthetic: iteration_duration must be positive");
}

namespace {

// Splits [0, length) into runs of min..max iterations; a short tail is
// merged into the previous run.
std::vector<int> level_runs(int length, int min_len, int max_len, std::mt19937_64& rng) {
  std::vector<int> runs;
  std::uniform_int_distribution<int> pick(min_len, max_len);
  int left = length;
  while (left > 0) {
    int r = std::min(pick(rng), left);
    if (left - r > 0 && left - r < min_len) r = left;
    runs.push_back(r);
    left -= r;
  }
  return runs;
}

std::vector<double> warmup_levels(WarmupShape shape, int runs, double steady, double gap, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> levels(runs);
  for (int k = 0; k < runs; ++k) {
    const double remaining = runs > 1 ? static_cast<double>(runs - 1 - k) / (runs - 1) : 0.0;
    switch (shape) {
      case WarmupShape::Decay:
        levels[k] = steady + gap * (1.0 + 2.0 * remaining + 0.3 * u(rng));
        break;
      case WarmupShape::Slowdown:
        levels[k] = steady - std::min(gap * (1.0 + 0.5 * u(rng)), 0.8 * steady);
        break;
      case WarmupShape::Oscillating: {
        const bool above = (runs - 1 - k) % 2 == 0;
        const double d = gap * (1.0 + u(rng));
        levels[k] = above ? steady + d : steady - std::min(d, 0.8 * steady);
        break;
      }
      case WarmupShape::Step:
        levels[k] = steady + gap * (1.0 + 2.0 * u(rng));
        break;
    }
  }
  return levels;
}

SopEntry developer_settings(int available_forks, std::mt19937_64& rng) {
  constexpr int kWarmup[] = {0, 3, 5, 10, 20, 50, 100, 200, 300};
  constexpr int kMeasurement[] = {10, 20, 50, 100};
  constexpr int kForks[] = {1, 2, 3, 5};
  std::uniform_int_distribution<int> w(0, 8), m(0, 3), f(0, 3);
  return {kWarmup[w(rng)], kMeasurement[m(rng)], std::min(kForks[f(rng)], available_forks)};
}

}  // namespace

SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(derive_seed(seed, "synthetic"));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> pick_st(spec.st_min, spec.st_max);
  std::uniform_int_distribution<std::size_t> pick_shape(0, spec.shapes.size() - 1);
  std::normal_distribution<double> normal(0.0, 1.0);

  SyntheticCorpus corpus;
  const int benchmarks = (spec.count + spec.forks - 1) / spec.forks;
  int produced = 0;
  for (int b = 0; b < benchmarks; ++b) {
    const int project = b / spec.benchmarks_per_project;
    const std::string project_name = "proj" + std::to_string(project);
    const std::string bench_name = project_name + ".Bench" + std::to_string(b);
    const double steady = spec.steady_level * (1.0 - spec.steady_level_spread + 2.0 * spec.steady_level_spread * u(rng));
    const double gap = steady * (spec.gap_min + (spec.gap_max - spec.gap_min) * u(rng));
    const WarmupShape shape = spec.shapes[pick_shape(rng)];
    const int forks = std::min(spec.forks, spec.count - produced);
    corpus.sop[bench_name] = developer_settings(forks, rng);

    for (int f = 0; f < forks; ++f, ++produced) {
      MeasurementSeries s;
      s.id = {project_name, bench_name, f};
      s.iteration_duration = spec.iteration_duration;
      s.values.resize(spec.n);
      const int st = pick_st(rng);
      const double fork_steady = std::max(steady + spec.fork_effect * gap * normal(rng), 0.05 * steady);
      const double sd = spec.noise * gap;

      int pos = 0;
      if (st > 1) {
        const auto runs = level_runs(st - 1, spec.min_level_length, spec.max_level_length, rng);
        const auto levels = warmup_levels(shape, static_cast<int>(runs.size()), fork_steady, gap, rng);
        for (std::size_t r = 0; r < runs.size(); ++r) {
          for (int i = 0; i < runs[r]; ++i) s.values[pos++] = levels[r] + sd * spec.warmup_noise_factor * normal(rng);
        }
      }
      for (; pos < spec.n; ++pos) s.values[pos] = fork_steady + (sd > 0.0 ? sd * normal(rng) : 0.0);
      if (spec.spike_probability > 0.0) {
        for (auto& v : s.values) {
          if (u(rng) < spec.spike_probability) v += spec.spike_height * gap * (0.5 + u(rng));
        }
      }
      for (auto& v : s.values) v = std::max(v, 0.01 * steady);

      corpus.truth[s.id] = SteadyStateAnnotation::at(st);
      corpus.shape_of.push_back(shape);
      corpus.series.push_back(std::move(s));
    }
  }
  return corpus;
}

}  // namespace warmstop
