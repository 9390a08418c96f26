#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace warmstop {

// 10 log-spaced values in [1e-3, 1e3].
std::vector<double> default_alpha_grid();

struct RidgeConfig {
  std::vector<double> alphas = default_alpha_grid();
  double scale_floor = 1e-8;
};

struct FeatureStats {
  std::vector<double> mean;
  std::vector<double> scale;  // > 0

  bool operator==(const FeatureStats&) const = default;
};

struct RidgeFit {
  std::vector<double> weights;  // on normalised features
  double intercept = 0.0;       // unpenalised
  double alpha = 0.0;
  FeatureStats stats;
  std::vector<double> loo_errors;  // mean squared LOO error per grid alpha
};

FeatureStats fit_feature_stats(const Eigen::MatrixXd& features, double scale_floor);
void normalize_features(Eigen::MatrixXd& features, const FeatureStats& stats);

// Mean squared leave-one-out error of ridge with an unpenalised intercept,
// for every alpha, from one eigendecomposition. `features` must already be
// column-centred; it is overwritten.
std::vector<double> ridge_loo_errors(Eigen::MatrixXd& features, std::span<const double> targets,
                                     std::span<const double> alphas);

// Ridge classifier on +-1 targets. Features are normalised with statistics
// fitted here; alpha is the grid value with the lowest closed-form LOO error.
RidgeFit fit_ridge(Eigen::MatrixXd features, std::span<const double> targets, const RidgeConfig& config = {});

}  // namespace warmstop
