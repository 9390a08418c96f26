#include "warmstop/rocket.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "warmstop/core_data.hpp"
#include "warmstop/rng.hpp"

namespace warmstop {

std::vector<Kernel> generate_kernels(int count, int window, std::uint64_t seed) {
  if (count <= 0) throw ConfigError("kernel count must be positive");
  if (window < 2) throw ConfigError("window must be >= 2");

  std::mt19937_64 rng(derive_seed(seed, "rocket-kernels"));
  std::uniform_int_distribution<int> pick_length(0, 2);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  constexpr int kLengths[] = {7, 9, 11};

  std::vector<Kernel> kernels(count);
  for (auto& k : kernels) {
    const int len = kLengths[pick_length(rng)];
    k.weights.resize(len);
    for (auto& w : k.weights) w = normal(rng);
    double mean = 0.0;
    for (double w : k.weights) mean += w;
    mean /= len;
    for (auto& w : k.weights) w -= mean;

    k.bias = -1.0 + 2.0 * unit(rng);
    const double max_exponent = std::log2(static_cast<double>(window - 1) / (len - 1));
    const double exponent = max_exponent > 0.0 ? unit(rng) * max_exponent : 0.0;
    k.dilation = std::max(1, static_cast<int>(std::pow(2.0, exponent)));
    k.padding = coin(rng) ? ((len - 1) * k.dilation) / 2 : 0;
  }
  return kernels;
}

KernelFeatures apply_kernel(std::span<const double> x, const Kernel& kernel) {
  const int n = static_cast<int>(x.size());
  const int len = kernel.length();
  const int d = kernel.dilation;
  const int pad = kernel.padding;
  const int span = (len - 1) * d;
  const int out_len = n + 2 * pad - span;
  if (out_len < 1) throw std::invalid_argument("apply_kernel: receptive field exceeds input");

  const double* w = kernel.weights.data();
  double max_value = -std::numeric_limits<double>::infinity();
  int positive = 0;
  for (int i = -pad; i < n + pad - span; ++i) {
    double sum = kernel.bias;
    if (i >= 0 && i + span < n) {
      const double* xi = x.data() + i;
      for (int j = 0; j < len; ++j) sum += w[j] * xi[j * d];
    } else {
      for (int j = 0, idx = i; j < len; ++j, idx += d) {
        if (idx >= 0 && idx < n) sum += w[j] * x[idx];
      }
    }
    if (sum > max_value) max_value = sum;
    if (sum > 0.0) ++positive;
  }
  return {max_value, static_cast<double>(positive) / out_len};
}

void transform_into(std::span<const double> standardized, const std::vector<Kernel>& kernels, std::span<double> out) {
  if (out.size() != 2 * kernels.size()) throw std::invalid_argument("transform: output size mismatch");
  for (std::size_t k = 0; k < kernels.size(); ++k) {
    const auto f = apply_kernel(standardized, kernels[k]);
    out[2 * k] = f.max;
    out[2 * k + 1] = f.ppv;
  }
}

std::vector<double> transform(std::span<const double> standardized, const std::vector<Kernel>& kernels) {
  std::vector<double> out(2 * kernels.size());
  transform_into(standardized, kernels, out);
  return out;
}

Eigen::MatrixXd transform_segments(const std::vector<std::span<const double>>& raw_segments,
                                   const std::vector<Kernel>& kernels) {
  const auto rows = static_cast<Eigen::Index>(raw_segments.size());
  const auto cols = static_cast<Eigen::Index>(2 * kernels.size());
  Eigen::MatrixXd features(rows, cols);
  std::vector<double> z;
  std::vector<double> row(cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto seg = raw_segments[r];
    z.resize(seg.size());
    standardize_into(seg, z);
    transform_into(z, kernels, row);
    for (Eigen::Index c = 0; c < cols; ++c) features(r, c) = row[c];
  }
  return features;
}

double decision_score(const RocketModel& model, std::span<const double> raw_segment) {
  if (static_cast<int>(raw_segment.size()) != model.window) {
    throw std::invalid_argument("predict: expected a window of " + std::to_string(model.window) + " values, got " +
                                std::to_string(raw_segment.size()));
  }
  std::vector<double> z(raw_segment.size());
  standardize_into(raw_segment, z);
  std::vector<double> features(2 * model.kernels.size());
  transform_into(z, model.kernels, features);
  double score = model.intercept;
  for (std::size_t j = 0; j < features.size(); ++j) {
    score += model.weights[j] * (features[j] - model.feature_stats.mean[j]) / model.feature_stats.scale[j];
  }
  return score;
}

Label predict(const RocketModel& model, std::span<const double> raw_segment) {
  // Ties resolve to Unstable: a false Stable verdict halts warm-up for good.
  return decision_score(model, raw_segment) > 0.0 ? Label::Stable : Label::Unstable;
}

RocketModel fit_rocket_features(std::vector<Kernel> kernels, int window, std::uint64_t seed, Eigen::MatrixXd features,
                                std::span<const Label> labels, const RidgeConfig& ridge) {
  if (features.rows() == 0) throw DataError("empty dataset");
  std::vector<double> targets(labels.size());
  std::transform(labels.begin(), labels.end(), targets.begin(),
                 [](Label l) { return l == Label::Stable ? 1.0 : -1.0; });
  auto fit = fit_ridge(std::move(features), targets, ridge);

  RocketModel model;
  model.window = window;
  model.seed = seed;
  model.kernels = std::move(kernels);
  model.alpha = fit.alpha;
  model.feature_stats = std::move(fit.stats);
  model.weights = std::move(fit.weights);
  model.intercept = fit.intercept;
  return model;
}

RocketModel fit_rocket(const std::vector<std::span<const double>>& raw_segments, std::span<const Label> labels,
                       int window, const RocketConfig& config) {
  if (raw_segments.empty()) throw DataError("empty dataset");
  for (const auto& s : raw_segments) {
    if (static_cast<int>(s.size()) != window) throw DataError("segment length does not match window");
  }
  auto kernels = generate_kernels(config.num_kernels, window, config.seed);
  auto features = transform_segments(raw_segments, kernels);
  return fit_rocket_features(std::move(kernels), window, config.seed, std::move(features), labels, config.ridge);
}

CrossValidation cross_validate(const SegmentDataset& dataset, int folds, const RocketConfig& config) {
  if (dataset.items.empty()) throw DataError("empty dataset");
  if (folds < 2) throw ConfigError("folds must be >= 2");
  const int window = static_cast<int>(dataset.items.front().segment.values.size());

  std::vector<int> fold_of(dataset.items.size());
  std::vector<std::span<const double>> segments;
  segments.reserve(dataset.items.size());
  for (std::size_t i = 0; i < dataset.items.size(); ++i) {
    const auto& item = dataset.items[i];
    if (static_cast<int>(item.segment.values.size()) != window) throw DataError("inconsistent segment lengths");
    fold_of[i] = dataset.fold_of(item);
    if (fold_of[i] < 0 || fold_of[i] >= folds) throw DataError("fold index out of range");
    segments.emplace_back(item.segment.values);
  }

  const auto kernels = generate_kernels(config.num_kernels, window, config.seed);
  const Eigen::MatrixXd features = transform_segments(segments, kernels);

  CrossValidation cv;
  for (int f = 0; f < folds; ++f) {
    std::vector<Eigen::Index> train, test;
    for (std::size_t i = 0; i < fold_of.size(); ++i) (fold_of[i] == f ? test : train).push_back(i);
    if (test.empty()) throw DataError("fold " + std::to_string(f) + " is empty");

    Eigen::MatrixXd x_train(static_cast<Eigen::Index>(train.size()), features.cols());
    std::vector<Label> y_train;
    y_train.reserve(train.size());
    for (std::size_t r = 0; r < train.size(); ++r) {
      x_train.row(r) = features.row(train[r]);
      y_train.push_back(dataset.items[train[r]].label);
    }
    auto model = fit_rocket_features(kernels, window, config.seed, std::move(x_train), y_train, config.ridge);

    for (auto i : test) {
      double score = model.intercept;
      for (Eigen::Index j = 0; j < features.cols(); ++j) {
        score += model.weights[j] * (features(i, j) - model.feature_stats.mean[j]) / model.feature_stats.scale[j];
      }
      cv.predictions.push_back({static_cast<std::size_t>(i), f, score > 0.0 ? Label::Stable : Label::Unstable,
                                dataset.items[i].label, score});
    }
    cv.models.push_back(std::move(model));
  }
  std::sort(cv.predictions.begin(), cv.predictions.end(),
            [](const FoldPrediction& a, const FoldPrediction& b) { return a.item < b.item; });
  return cv;
}

}  // namespace warmstop
