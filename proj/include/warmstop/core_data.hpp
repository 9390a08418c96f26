#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "warmstop/types.hpp"

namespace warmstop {

struct Standardized {
  std::vector<double> values;
  bool degenerate = false;  // zero variance; values are all zero
};

// Per-segment z-normalisation (x - mean) / sd with the population sd.
// Zero-variance segments map to all zeros and are flagged degenerate.
Standardized standardize_segment(std::span<const double> values);

// In-place variant used on hot paths; returns the degenerate flag.
bool standardize_into(std::span<const double> values, std::span<double> out);

struct ValidationIssue {
  enum class Kind { Empty, NonFinite, NonPositive, LengthMismatch, BadDuration };
  Kind kind;
  std::optional<std::size_t> index;  // 0-based offending position, if any
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool valid() const { return issues.empty(); }
  std::string summary() const;
};

ValidationReport validate_series(const MeasurementSeries& series,
                                 std::optional<std::size_t> expected_length = std::nullopt);

}  // namespace warmstop
