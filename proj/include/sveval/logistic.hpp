#pragma once

// Logistic regression fitted by iteratively reweighted least squares
// (Newton-Raphson on the Bernoulli log-likelihood) with step halving.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "sveval/encoding.hpp"
#include "sveval/errors.hpp"

namespace sveval {

struct LogisticConfig {
  int max_iterations = 100;
  double tolerance = 1e-8;  // on |change in deviance| / (|deviance| + 0.1)
  int max_halvings = 10;
  double separation_bound = 30.0;  // max |coefficient| before declaring separation
};

struct ConvergenceRecord {
  int iterations = 0;
  double deviance_change = 0.0;
  std::vector<double> deviance_trace;  // starting deviance, then one per iteration
};

struct LogisticModel {
  double intercept = 0.0;
  std::vector<double> coefficients;
  std::vector<double> standard_errors;  // intercept first, then coefficients
  ConvergenceRecord convergence;
};

inline double inverse_logit(double eta) noexcept {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

namespace detail {

inline double softplus(double z) noexcept {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

/// -2 log-likelihood of labels y under linear predictor eta.
inline double logistic_deviance(const Eigen::VectorXd& eta, const Dataset& data) {
  double dev = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const auto row = static_cast<std::size_t>(i);
    dev += data.weight(row) * softplus(data.y[row] == 1 ? -eta[i] : eta[i]);
  }
  return 2.0 * dev;
}

}  // namespace detail

/// Maximum-likelihood fit. Training weights in `data.w` scale each
/// record's likelihood contribution (unit when empty).
///
/// Throws DataError for fewer than two records or a single class,
/// SeparationError when a coefficient exceeds the separation bound,
/// ConvergenceError when the deviance change does not fall below the
/// tolerance within max_iterations (or a step cannot be made to reduce the
/// deviance), and NumericalError for a singular information matrix.
inline LogisticModel fit_logistic(const Dataset& data, const LogisticConfig& config = {}) {
  const std::size_t n = data.rows();
  if (n < 2) throw DataError("logistic fit needs at least two records");
  const bool has_pos = std::find(data.y.begin(), data.y.end(), 1) != data.y.end();
  const bool has_neg = std::find(data.y.begin(), data.y.end(), 0) != data.y.end();
  if (!has_pos || !has_neg) throw DataError("logistic fit needs both outcome classes");

  const auto p = static_cast<Eigen::Index>(data.cols + 1);
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), p);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    X(r, 0) = 1.0;
    const auto row = data.row(i);
    for (std::size_t j = 0; j < data.cols; ++j) X(r, static_cast<Eigen::Index>(j + 1)) = row[j];
  }
  Eigen::VectorXd y(static_cast<Eigen::Index>(n)), w(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    y[static_cast<Eigen::Index>(i)] = data.y[i];
    w[static_cast<Eigen::Index>(i)] = data.weight(i);
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd eta = X * beta;
  double deviance = detail::logistic_deviance(eta, data);
  LogisticModel model;
  model.convergence.deviance_trace.push_back(deviance);

  auto information = [&](const Eigen::VectorXd& linear) {
    Eigen::VectorXd v(linear.size());
    for (Eigen::Index i = 0; i < linear.size(); ++i) {
      const double mu = inverse_logit(linear[i]);
      v[i] = w[i] * mu * (1.0 - mu);
    }
    return Eigen::MatrixXd(X.transpose() * v.asDiagonal() * X);
  };

  bool converged = false;
  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    Eigen::VectorXd resid(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) resid[i] = w[i] * (y[i] - inverse_logit(eta[i]));
    const Eigen::LDLT<Eigen::MatrixXd> solver(information(eta));
    if (solver.info() != Eigen::Success || !solver.isPositive() ||
        solver.vectorD().minCoeff() <= 1e-12 * std::max(1.0, solver.vectorD().maxCoeff()))
      throw NumericalError("logistic fit: information matrix is singular");
    const Eigen::VectorXd step = solver.solve(X.transpose() * resid);

    double scale = 1.0;
    Eigen::VectorXd candidate = beta + step;
    Eigen::VectorXd candidate_eta = X * candidate;
    double candidate_dev = detail::logistic_deviance(candidate_eta, data);
    int halvings = 0;
    while (!(candidate_dev <= deviance) && halvings < config.max_halvings) {
      scale *= 0.5;
      ++halvings;
      candidate = beta + scale * step;
      candidate_eta = X * candidate;
      candidate_dev = detail::logistic_deviance(candidate_eta, data);
    }
    if (!(candidate_dev <= deviance)) {
      // The Newton step could not reduce the deviance; at a numerical
      // optimum the change is zero and the fit has converged.
      if (std::abs(candidate_dev - deviance) / (std::abs(deviance) + 0.1) < config.tolerance) {
        model.convergence.iterations = iter;
        model.convergence.deviance_change = 0.0;
        converged = true;
        break;
      }
      throw ConvergenceError("logistic fit: step halving failed to reduce the deviance");
    }

    const double change = deviance - candidate_dev;
    beta = candidate;
    eta = candidate_eta;
    deviance = candidate_dev;
    model.convergence.deviance_trace.push_back(deviance);
    model.convergence.iterations = iter;
    model.convergence.deviance_change = change;
    if (beta.cwiseAbs().maxCoeff() > config.separation_bound)
      throw SeparationError("logistic fit: coefficients diverge (complete or quasi-complete separation)");
    if (change / (std::abs(deviance) + 0.1) < config.tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw ConvergenceError("logistic fit did not converge in " +
                           std::to_string(config.max_iterations) + " iterations");

  const Eigen::MatrixXd covariance = information(eta).ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  model.intercept = beta[0];
  for (Eigen::Index j = 1; j < p; ++j) model.coefficients.push_back(beta[j]);
  for (Eigen::Index j = 0; j < p; ++j) model.standard_errors.push_back(std::sqrt(covariance(j, j)));
  return model;
}

inline double predict_proba(const LogisticModel& model, std::span<const double> row) {
  if (row.size() != model.coefficients.size())
    throw DataError("schema mismatch: logistic model expects " +
                    std::to_string(model.coefficients.size()) + " encoded columns");
  double eta = model.intercept;
  for (std::size_t j = 0; j < row.size(); ++j) eta += model.coefficients[j] * row[j];
  return inverse_logit(eta);
}

}  // namespace sveval
