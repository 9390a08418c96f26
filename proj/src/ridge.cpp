#include "warmstop/ridge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "warmstop/types.hpp"

namespace warmstop {

std::vector<double> default_alpha_grid() {
  std::vector<double> grid(10);
  for (int k = 0; k < 10; ++k) grid[k] = std::pow(10.0, -3.0 + 6.0 * k / 9.0);
  return grid;
}

FeatureStats fit_feature_stats(const Eigen::MatrixXd& features, double scale_floor) {
  const auto n = static_cast<double>(features.rows());
  FeatureStats stats;
  stats.mean.resize(features.cols());
  stats.scale.resize(features.cols());
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    const double mean = features.col(j).mean();
    const double var = (features.col(j).array() - mean).square().sum() / n;
    stats.mean[j] = mean;
    stats.scale[j] = std::max(std::sqrt(var), scale_floor);
  }
  return stats;
}

void normalize_features(Eigen::MatrixXd& features, const FeatureStats& stats) {
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    features.col(j).array() = (features.col(j).array() - stats.mean[j]) / stats.scale[j];
  }
}

namespace {

// Spectral form of the centred ridge problem: X = G V^T with G = X V.
struct Spectral {
  Eigen::MatrixXd basis;      // V (p x p)
  Eigen::VectorXd eigvals;    // lambda_j >= 0
  Eigen::VectorXd projected;  // q = G^T (y - ybar)
  double ybar = 0.0;
};

Spectral decompose(Eigen::MatrixXd& x, std::span<const double> targets) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  Spectral s;
  Eigen::Map<const Eigen::VectorXd> y(targets.data(), n);
  s.ybar = y.mean();

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram.selfadjointView<Eigen::Lower>());
  if (eig.info() != Eigen::Success) throw std::runtime_error("ridge: eigendecomposition failed");
  s.basis = eig.eigenvectors();
  s.eigvals = eig.eigenvalues().cwiseMax(0.0);

  // x <- x V, row block by row block to bound the temporary.
  constexpr Eigen::Index kBlock = 2048;
  for (Eigen::Index r = 0; r < n; r += kBlock) {
    const Eigen::Index rows = std::min(kBlock, n - r);
    Eigen::MatrixXd block = x.middleRows(r, rows) * s.basis;
    x.middleRows(r, rows) = block;
  }
  s.projected = x.transpose() * (y.array() - s.ybar).matrix();
  return s;
}

double loo_error(const Eigen::MatrixXd& g, const Spectral& s, std::span<const double> targets, double alpha) {
  const Eigen::Index n = g.rows();
  const Eigen::VectorXd inv = (s.eigvals.array() + alpha).inverse();
  const Eigen::VectorXd coef = s.projected.cwiseProduct(inv);
  const Eigen::VectorXd fitted = (g * coef).array() + s.ybar;
  Eigen::VectorXd leverage = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (Eigen::Index j = 0; j < g.cols(); ++j) leverage += g.col(j).cwiseAbs2() * inv[j];

  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double e = (targets[i] - fitted[i]) / (1.0 - leverage[i]);
    total += e * e;
  }
  return total / static_cast<double>(n);
}

}  // namespace

std::vector<double> ridge_loo_errors(Eigen::MatrixXd& features, std::span<const double> targets,
                                     std::span<const double> alphas) {
  if (static_cast<Eigen::Index>(targets.size()) != features.rows())
    throw std::invalid_argument("ridge: target count does not match feature rows");
  const Spectral s = decompose(features, targets);
  std::vector<double> errors;
  errors.reserve(alphas.size());
  for (double a : alphas) errors.push_back(loo_error(features, s, targets, a));
  return errors;
}

RidgeFit fit_ridge(Eigen::MatrixXd features, std::span<const double> targets, const RidgeConfig& config) {
  if (static_cast<Eigen::Index>(targets.size()) != features.rows())
    throw std::invalid_argument("ridge: target count does not match feature rows");
  if (config.alphas.empty()) throw ConfigError("ridge: empty alpha grid");
  for (double a : config.alphas) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("ridge: alphas must be positive and finite");
  }
  std::size_t pos = 0, neg = 0;
  for (double t : targets) {
    if (t == 1.0) ++pos;
    else if (t == -1.0) ++neg;
    else throw std::invalid_argument("ridge: targets must be +1 or -1");
  }
  if (pos == 0 || neg == 0) throw DataError("degenerate labels");
  if (pos < 2 || neg < 2) throw DataError("ridge: need at least 2 examples of each class");

  RidgeFit fit;
  fit.stats = fit_feature_stats(features, config.scale_floor);
  normalize_features(features, fit.stats);

  const Spectral s = decompose(features, targets);
  std::size_t best = 0;
  for (std::size_t k = 0; k < config.alphas.size(); ++k) {
    fit.loo_errors.push_back(loo_error(features, s, targets, config.alphas[k]));
    if (fit.loo_errors[k] < fit.loo_errors[best]) best = k;
  }
  fit.alpha = config.alphas[best];
  const Eigen::VectorXd coef = s.projected.cwiseProduct((s.eigvals.array() + fit.alpha).inverse().matrix());
  const Eigen::VectorXd w = s.basis * coef;
  fit.weights.assign(w.data(), w.data() + w.size());
  fit.intercept = s.ybar;
  return fit;
}

}  // namespace warmstop
