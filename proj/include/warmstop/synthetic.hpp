#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "warmstop/baselines.hpp"
#include "warmstop/types.hpp"

namespace warmstop {

enum class WarmupShape {
  Decay,        // levels above steady state, shrinking towards it
  Slowdown,     // levels below steady state (JIT deoptimisation pattern)
  Oscillating,  // levels alternating above and below
  Step,         // unordered levels above steady state
};

const char* to_string(WarmupShape shape);
WarmupShape warmup_shape_from_string(const std::string& text);

struct SyntheticSpec {
  int count = 10;  // total series
  int n = 800;
  int st_min = 301;  // true steady-state iteration, uniform on [st_min, st_max]
  int st_max = 301;
  double steady_level = 1e-3;         // seconds per operation
  double steady_level_spread = 0.5;   // per-benchmark level factor U(1 - s, 1 + s)
  double gap_min = 0.2;               // smallest |warm-up level - steady|, relative to steady
  double gap_max = 0.6;
  double noise = 0.02;                // Gaussian sd as a fraction of the level gap
  double warmup_noise_factor = 1.0;   // extra sd multiplier during warm-up
  double fork_effect = 0.0;           // per-fork steady offset sd, fraction of the gap
  double spike_probability = 0.0;     // per iteration
  double spike_height = 3.0;          // multiples of the level gap
  int min_level_length = 10;
  int max_level_length = 60;
  std::vector<WarmupShape> shapes = {WarmupShape::Decay, WarmupShape::Slowdown, WarmupShape::Oscillating,
                                     WarmupShape::Step};
  int forks = 1;  // series per benchmark
  int benchmarks_per_project = 10;
  double iteration_duration = 1.0;

  void validate() const;
};

struct SyntheticCorpus {
  std::vector<MeasurementSeries> series;
  AnnotationMap truth;
  SopConfig sop;  // plausible developer settings, one per benchmark
  std::vector<WarmupShape> shape_of;  // parallel to series
};

// Piecewise-level series (warm-up levels, then one steady level) with
// Gaussian noise and optional spikes; the true st is known by construction.
SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace warmstop
