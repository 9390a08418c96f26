#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "warmstop/ridge.hpp"
#include "warmstop/types.hpp"

namespace warmstop {

struct Kernel {
  std::vector<double> weights;  // length 7, 9 or 11, zero mean
  double bias = 0.0;
  int dilation = 1;
  int padding = 0;

  int length() const { return static_cast<int>(weights.size()); }
  bool operator==(const Kernel&) const = default;
};

// Random kernel bank: length uniform on {7, 9, 11}, N(0, 1) weights
// centred to zero mean, bias U(-1, 1), dilation floor(2^U(0, log2((W-1)/(len-1)))),
// padding ((len-1) * dilation) / 2 with probability 1/2, else 0.
std::vector<Kernel> generate_kernels(int count, int window, std::uint64_t seed);

struct KernelFeatures {
  double max = 0.0;
  double ppv = 0.0;  // fraction of activations > 0
};

KernelFeatures apply_kernel(std::span<const double> series, const Kernel& kernel);

// Features laid out as (max, ppv) per kernel, 2 * |kernels| values.
void transform_into(std::span<const double> standardized, const std::vector<Kernel>& kernels, std::span<double> out);
std::vector<double> transform(std::span<const double> standardized, const std::vector<Kernel>& kernels);

// Standardises each raw segment and transforms it; one row per segment.
Eigen::MatrixXd transform_segments(const std::vector<std::span<const double>>& raw_segments,
                                   const std::vector<Kernel>& kernels);

struct RocketConfig {
  int num_kernels = 500;
  std::uint64_t seed = 0;
  RidgeConfig ridge;
};

struct RocketModel {
  int window = 0;
  std::uint64_t seed = 0;
  std::vector<Kernel> kernels;
  double alpha = 0.0;
  FeatureStats feature_stats;
  std::vector<double> weights;  // 2 * |kernels|
  double intercept = 0.0;

  bool operator==(const RocketModel&) const = default;
};

// Ridge score of a raw window; Stable iff the score is strictly positive.
double decision_score(const RocketModel& model, std::span<const double> raw_segment);
Label predict(const RocketModel& model, std::span<const double> raw_segment);

// Fits the ridge head on already transformed features (rows = segments).
RocketModel fit_rocket_features(std::vector<Kernel> kernels, int window, std::uint64_t seed,
                                Eigen::MatrixXd features, std::span<const Label> labels,
                                const RidgeConfig& ridge = {});

RocketModel fit_rocket(const std::vector<std::span<const double>>& raw_segments, std::span<const Label> labels,
                       int window, const RocketConfig& config);

// Versioned little-endian binary container.
class ModelFormatError : public DataError {
 public:
  using DataError::DataError;
};

inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(const RocketModel& model, const std::filesystem::path& path);
RocketModel load_model(const std::filesystem::path& path, std::optional<int> expected_window = std::nullopt);
std::vector<unsigned char> serialize_model(const RocketModel& model);
RocketModel deserialize_model(std::span<const unsigned char> bytes, std::optional<int> expected_window = std::nullopt);

struct FoldPrediction {
  std::size_t item = 0;  // index into the dataset
  int fold = 0;
  Label predicted = Label::Unstable;
  Label truth = Label::Unstable;
  double score = 0.0;
};

struct CrossValidation {
  std::vector<RocketModel> models;  // models[f] never saw fold f
  std::vector<FoldPrediction> predictions;
};

// k-fold cross-validation grouped by the dataset's fold assignment. The
// kernel bank is shared across folds; each fold fits its own ridge head.
CrossValidation cross_validate(const SegmentDataset& dataset, int folds, const RocketConfig& config);

}  // namespace warmstop
