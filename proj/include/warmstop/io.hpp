#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "warmstop/baselines.hpp"
#include "warmstop/stopper.hpp"
#include "warmstop/types.hpp"

namespace warmstop::io {

namespace fs = std::filesystem;

// First line of every JSONL artifact and first comment of every CSV.
struct ArtifactHeader {
  std::string format;
  std::uint64_t seed = 0;
  nlohmann::json extra = nlohmann::json::object();

  nlohmann::json to_json() const;
};

inline constexpr const char* kToolVersion = "0.3.0";

// Writes via a temporary sibling and renames; the temporary is removed if
// `write` throws, so a failed command leaves no partial output.
void write_atomically(const fs::path& path, const std::function<void(std::ostream&)>& write);

std::string format_double(double v);

// Series corpus: {project, benchmark, fork, iteration_duration_s, values}.
std::vector<MeasurementSeries> read_corpus(const fs::path& path);
void write_corpus(const fs::path& path, const std::vector<MeasurementSeries>& corpus, const ArtifactHeader& header);

// Annotation sidecar: {project, benchmark, fork, st (nullable)}.
AnnotationMap read_annotations(const fs::path& path);
void write_annotations(const fs::path& path, const AnnotationMap& annotations, const ArtifactHeader& header);

// Segment dataset: {project, benchmark, fork, start, label, values, fold?}.
SegmentDataset read_dataset(const fs::path& path);
void write_dataset(const fs::path& path, const SegmentDataset& dataset, const ArtifactHeader& header);

std::map<std::string, int> read_fold_map(const fs::path& path);
void write_fold_map(const fs::path& path, const std::map<std::string, int>& folds, const ArtifactHeader& header);

// SOP table CSV: project,benchmark,warmup,measurement,forks.
SopConfig read_sop_config(const fs::path& path);
void write_sop_config(const fs::path& path, const SopConfig& sop, const std::map<std::string, std::string>& projects,
                      const ArtifactHeader& header);

// Simulation results CSV: project,benchmark,fork,warmup_iterations,halt_reason,queries.
struct ResultRow {
  BenchmarkId id;
  int warmup_iterations = 0;
  HaltReason halt_reason = HaltReason::CapReached;
  int queries = 0;
};
std::vector<ResultRow> read_results(const fs::path& path);
void write_results(const fs::path& path, const std::vector<ResultRow>& rows, const ArtifactHeader& header);

// Splits one CSV line (no quoting support; fields never contain commas).
std::vector<std::string> split_csv(const std::string& line);

// Reads a CSV into header-keyed rows, skipping '#' comment lines.
std::vector<std::map<std::string, std::string>> read_csv(const fs::path& path);

std::string sha256_file(const fs::path& path);

}  // namespace warmstop::io
