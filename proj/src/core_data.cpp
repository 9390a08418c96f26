#include "warmstop/core_data.hpp"

#include <cmath>
#include <sstream>

namespace warmstop {

std::string BenchmarkId::to_string() const {
  return project + "/" + benchmark + "#" + std::to_string(fork);
}

const char* to_string(Label label) { return label == Label::Stable ? "stable" : "unstable"; }

Label label_from_string(const std::string& text) {
  if (text == "stable") return Label::Stable;
  if (text == "unstable") return Label::Unstable;
  throw DataError("unknown label '" + text + "'");
}

int SegmentDataset::fold_of(const LabeledSegment& item) const {
  auto it = fold_assignment.find(item.segment.source.benchmark);
  if (it == fold_assignment.end()) {
    throw DataError("benchmark '" + item.segment.source.benchmark + "' has no fold");
  }
  return it->second;
}

bool standardize_into(std::span<const double> values, std::span<double> out) {
  const auto w = values.size();
  if (w < 2) throw std::invalid_argument("standardize_segment: need at least 2 values");
  if (out.size() != w) throw std::invalid_argument("standardize_segment: output size mismatch");

  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(w);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(w));

  // Rounding in the mean leaves ~1e-16 relative residue on constant input.
  if (!(sd > 1e-12 * std::abs(mean)) || sd == 0.0) {
    for (auto& o : out) o = 0.0;
    return true;
  }
  for (std::size_t i = 0; i < w; ++i) out[i] = (values[i] - mean) / sd;
  return false;
}

Standardized standardize_segment(std::span<const double> values) {
  Standardized result;
  result.values.resize(values.size());
  result.degenerate = standardize_into(values, result.values);
  return result;
}

std::string ValidationReport::summary() const {
  if (issues.empty()) return "valid";
  std::ostringstream os;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) os << "; ";
    os << issues[i].message;
  }
  return os.str();
}

ValidationReport validate_series(const MeasurementSeries& series, std::optional<std::size_t> expected_length) {
  using Kind = ValidationIssue::Kind;
  ValidationReport report;
  if (series.values.empty()) {
    report.issues.push_back({Kind::Empty, std::nullopt, "empty"});
  }
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    const double v = series.values[i];
    if (!std::isfinite(v)) {
      report.issues.push_back({Kind::NonFinite, i, "non-finite value at index " + std::to_string(i)});
    } else if (v <= 0.0) {
      report.issues.push_back({Kind::NonPositive, i, "non-positive value at index " + std::to_string(i)});
    }
  }
  if (expected_length && series.values.size() != *expected_length) {
    report.issues.push_back({Kind::LengthMismatch, std::nullopt,
                             "length " + std::to_string(series.values.size()) + " != expected " +
                                 std::to_string(*expected_length)});
  }
  if (!(std::isfinite(series.iteration_duration) && series.iteration_duration > 0.0)) {
    report.issues.push_back({Kind::BadDuration, std::nullopt, "iteration_duration must be positive"});
  }
  return report;
}

}  // namespace warmstop
