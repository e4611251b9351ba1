#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace trustlab::ts {

// ARMA(p, q) convention used throughout:
//   w_t = phi_1 w_{t-1} + ... + phi_p w_{t-p} + e_t + theta_1 e_{t-1} + ... + theta_q e_{t-q}

/// True when every root of 1 - phi_1 z - ... - phi_p z^p lies outside the unit circle.
bool is_stationary(std::span<const double> phi);
/// True when every root of 1 + theta_1 z + ... + theta_q z^q lies outside the unit circle.
bool is_invertible(std::span<const double> theta);

/// Maps unconstrained reals onto stationary AR coefficients: tanh gives
/// partial autocorrelations in (-1, 1), Durbin-Levinson turns them into phi.
std::vector<double> ar_from_unconstrained(std::span<const double> raw);
/// Inverse of ar_from_unconstrained. Requires a stationary input.
std::vector<double> ar_to_unconstrained(std::span<const double> phi);
/// Same map for MA coefficients, producing an invertible theta.
std::vector<double> ma_from_unconstrained(std::span<const double> raw);
std::vector<double> ma_to_unconstrained(std::span<const double> theta);

/// One-step prediction-error decomposition of one or more series that share
/// the same ARMA dynamics. Innovation variances are in units of sigma^2.
struct FilterResult {
  Eigen::MatrixXd innovations;  // n x s, y_t - E[y_t | y_<t]
  Eigen::MatrixXd predictions;  // n x s, E[y_t | y_<t]
  Eigen::VectorXd variances;    // n, Var[y_t | y_<t] / sigma^2
};

/// Kalman filter for a zero-mean ARMA process started from its stationary
/// distribution. Each column of `data` is filtered independently.
FilterResult arma_filter(const Eigen::MatrixXd& data, std::span<const double> phi,
                         std::span<const double> theta);

/// Exact Gaussian log-likelihood of a zero-mean ARMA series. Throws
/// std::domain_error for non-stationary or non-invertible parameters.
double arma_loglik(std::span<const double> y, std::span<const double> phi,
                   std::span<const double> theta, double sigma2);

}  // namespace trustlab::ts
