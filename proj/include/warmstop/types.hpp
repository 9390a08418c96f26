#pragma once

#include <compare>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace warmstop {

// Errors caused by bad input data (as opposed to programming errors).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Errors caused by an invalid configuration value.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct BenchmarkId {
  std::string project;
  std::string benchmark;  // fully-qualified benchmark name
  int fork = 0;

  auto operator<=>(const BenchmarkId&) const = default;
  bool operator==(const BenchmarkId&) const = default;

  std::string to_string() const;
};

// One fork of one benchmark: iteration-ordered average execution times
// (seconds per operation).
struct MeasurementSeries {
  BenchmarkId id;
  std::vector<double> values;
  double iteration_duration = 1.0;  // wall-clock seconds per iteration

  std::size_t size() const { return values.size(); }
  bool operator==(const MeasurementSeries&) const = default;
};

// Ground-truth steady-state iteration. `st` is 1-based; absent means the
// series never reached a steady state.
struct SteadyStateAnnotation {
  std::optional<int> st;

  bool reached() const { return st.has_value(); }
  static SteadyStateAnnotation at(int iteration) { return {iteration}; }
  static SteadyStateAnnotation never() { return {}; }

  bool operator==(const SteadyStateAnnotation&) const = default;
};

enum class Label { Unstable = 0, Stable = 1 };

const char* to_string(Label label);
Label label_from_string(const std::string& text);

// Stable iff the window starts at or after the steady-state iteration.
inline Label label_for_start(int start, int st) { return start >= st ? Label::Stable : Label::Unstable; }

struct Segment {
  BenchmarkId source;
  int start = 1;  // 1-based iteration of values[0]
  std::vector<double> values;

  bool operator==(const Segment&) const = default;
};

struct LabeledSegment {
  Segment segment;
  Label label = Label::Unstable;

  bool operator==(const LabeledSegment&) const = default;
};

struct SegmentDataset {
  std::vector<LabeledSegment> items;
  std::map<std::string, int> fold_assignment;  // benchmark name -> fold

  int fold_of(const LabeledSegment& item) const;
  bool operator==(const SegmentDataset&) const = default;
};

using AnnotationMap = std::map<BenchmarkId, SteadyStateAnnotation>;

}  // namespace warmstop
