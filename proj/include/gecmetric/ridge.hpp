#pragma once

// Ridge regression by the normal equations. Features are centered (and by
// default scaled to unit variance) so that the bias is left unpenalized.

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gecmetric/error.hpp"

namespace gecmetric {

struct RidgeOptions {
  double alpha = 1.0;
  bool standardize = true;
};

struct RidgeModel {
  std::vector<std::string> feature_names;
  std::vector<double> means;
  std::vector<double> stdevs;   // 1 for unscaled or dropped features
  std::vector<double> weights;  // on the standardized scale
  std::vector<std::string> dropped_features;
  double bias = 0.0;
  double alpha = 0.0;

  std::size_t features() const { return weights.size(); }

  double predict(std::span<const double> x) const {
    if (x.size() != weights.size())
      throw ValidationError("model expects " + std::to_string(weights.size()) +
                            " features, got " + std::to_string(x.size()));
    double y = bias;
    for (std::size_t j = 0; j < x.size(); ++j) y += weights[j] * (x[j] - means[j]) / stdevs[j];
    return y;
  }

  // Slope per raw feature and the raw-scale intercept.
  std::pair<std::vector<double>, double> raw_coefficients() const {
    std::vector<double> slopes(weights.size());
    double intercept = bias;
    for (std::size_t j = 0; j < weights.size(); ++j) {
      slopes[j] = weights[j] / stdevs[j];
      intercept -= slopes[j] * means[j];
    }
    return {slopes, intercept};
  }
};

// Solves (ZᵀZ + αI) w = Zᵀy with a Cholesky factorization.
inline Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
                                   double alpha) {
  Eigen::MatrixXd gram = z.transpose() * z;
  gram.diagonal().array() += alpha;
  const Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success)
    throw ValidationError("normal equations are not positive definite (collinear features with alpha = 0?)");
  return llt.solve(z.transpose() * y);
}

inline RidgeModel train_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                              const RidgeOptions& opt, std::vector<std::string> names = {}) {
  const auto rows = x.rows();
  const auto cols = x.cols();
  if (rows < 2) throw ValidationError("ridge regression needs at least 2 rows");
  if (y.size() != rows) throw ValidationError("target count does not match row count");
  if (!(opt.alpha >= 0.0) || !std::isfinite(opt.alpha))
    throw ValidationError("ridge alpha must be a finite value >= 0");
  if (!x.allFinite() || !y.allFinite()) throw ValidationError("non-finite training input");
  if (names.empty())
    for (Eigen::Index j = 0; j < cols; ++j) names.push_back("x" + std::to_string(j));
  if (static_cast<Eigen::Index>(names.size()) != cols)
    throw ValidationError("feature name count does not match column count");

  RidgeModel m;
  m.feature_names = std::move(names);
  m.alpha = opt.alpha;
  m.means.assign(static_cast<std::size_t>(cols), 0.0);
  m.stdevs.assign(static_cast<std::size_t>(cols), 1.0);
  m.weights.assign(static_cast<std::size_t>(cols), 0.0);

  std::vector<Eigen::Index> active;
  for (Eigen::Index j = 0; j < cols; ++j) {
    const double mean = x.col(j).mean();
    const double var = (x.col(j).array() - mean).square().mean();
    m.means[static_cast<std::size_t>(j)] = mean;
    if (var <= 0.0) {
      m.dropped_features.push_back(m.feature_names[static_cast<std::size_t>(j)]);
      continue;
    }
    if (opt.standardize) m.stdevs[static_cast<std::size_t>(j)] = std::sqrt(var);
    active.push_back(j);
  }

  const double y_mean = y.mean();
  m.bias = y_mean;
  if (active.empty()) return m;

  Eigen::MatrixXd z(rows, static_cast<Eigen::Index>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k) {
    const auto j = static_cast<std::size_t>(active[k]);
    z.col(static_cast<Eigen::Index>(k)) =
        (x.col(active[k]).array() - m.means[j]) / m.stdevs[j];
  }
  const Eigen::VectorXd w = ridge_solve(z, y.array() - y_mean, opt.alpha);
  for (std::size_t k = 0; k < active.size(); ++k)
    m.weights[static_cast<std::size_t>(active[k])] = w(static_cast<Eigen::Index>(k));
  return m;
}

}  // namespace gecmetric
