#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "trustlab/ts/optimize.hpp"
#include "trustlab/ts/series.hpp"

namespace trustlab::ts {

struct ArimaOrder {
  int p = 0;
  int d = 0;
  int q = 0;

  void validate() const;
  friend bool operator==(const ArimaOrder&, const ArimaOrder&) = default;
};

struct FitOptions {
  int restarts = 5;
  std::uint64_t seed = 0;
  SimplexOptions simplex;
  bool standard_errors = true;
};

/// Regression with ARIMA errors:
///   y_t = beta' x_t + eta_t,   (1 - B)^d eta_t ~ ARMA(p, q).
///
/// With d = 1 and one-hot regressors the overall level differences out of the
/// likelihood. The fit then estimates contrasts and pins the level so that
/// eta has zero sample mean; `level_normalized` records this.
struct ArimaxFit {
  ArimaOrder order;
  ExogSelector exog;
  std::vector<std::string> exog_names;
  Eigen::VectorXd beta;
  std::vector<double> phi;
  std::vector<double> theta;
  double sigma2 = 0.0;
  double loglik = 0.0;
  double aic = 0.0;
  int n_params = 0;  // p + q + |beta| + 1

  // Standard errors from the numerical Hessian; NaN when unavailable.
  Eigen::VectorXd beta_se;
  std::vector<double> phi_se;
  std::vector<double> theta_se;
  double sigma2_se = 0.0;

  std::vector<double> residuals;  // one-step errors on the original scale
  double one_step_rmse = 0.0;
  bool converged = true;
  bool level_normalized = false;
  int evaluations = 0;
};

/// One-step-ahead predictions aligned with y[offset..]; offset == d.
struct OneStepForecast {
  std::size_t offset = 0;
  std::vector<double> predicted;
  double rmse = 0.0;
};

double aic_value(double loglik, int n_params);

/// Exact Gaussian MLE. beta and sigma2 are profiled out in closed form; the
/// ARMA part is searched by multistart Nelder-Mead over the stationarity /
/// invertibility-enforcing reparameterization.
ArimaxFit arimax_fit(const TrustSeries& y, ArimaOrder order,
                     ExogSelector exog = ExogSelector::capability_only(),
                     const FitOptions& opts = {});

/// Same model on a raw response and design matrix (columns named col0, ...).
ArimaxFit arimax_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, ArimaOrder order,
                     const FitOptions& opts = {});

/// Filtered one-step predictions of y_t from y_<t and x_t using the fit's
/// parameters unchanged.
OneStepForecast forecast_one_step(const ArimaxFit& fit, const TrustSeries& y);
OneStepForecast forecast_one_step(const ArimaxFit& fit, const Eigen::VectorXd& y,
                                  const Eigen::MatrixXd& x);

/// Prediction RMSE of `fit` applied to another series.
double cross_validate(const ArimaxFit& fit, const TrustSeries& other);

struct AicTable {
  int d = 1;
  std::vector<int> p_values;
  std::vector<int> q_values;
  // aic[i][j] for p_values[i], q_values[j]; empty when that fit failed.
  std::vector<std::vector<std::optional<double>>> aic;
  std::vector<std::vector<std::string>> errors;
  std::optional<ArimaOrder> best;
};

/// Fits every (p, d, q) cell. Ties go to the smaller p + q, then smaller p.
AicTable aic_grid(const TrustSeries& y, const std::vector<int>& p_values,
                  const std::vector<int>& q_values, int d,
                  ExogSelector exog = ExogSelector::capability_only(),
                  const FitOptions& opts = {});
AicTable aic_grid(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                  const std::vector<int>& p_values, const std::vector<int>& q_values, int d,
                  const FitOptions& opts = {});

std::vector<int> int_range(int lo, int hi);

}  // namespace trustlab::ts
