#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace trustlab::ts {

/// Thrown when the design matrix is not of full column rank. `columns` lists
/// the columns (of the matrix as passed, intercept excluded) that are linear
/// combinations of earlier ones.
class RankDeficientError : public std::runtime_error {
 public:
  RankDeficientError(const std::string& what, std::vector<int> columns)
      : std::runtime_error(what), columns_(std::move(columns)) {}
  const std::vector<int>& columns() const { return columns_; }

 private:
  std::vector<int> columns_;
};

struct OlsFit {
  bool intercept = false;
  Eigen::VectorXd coefficients;  // intercept first when present
  Eigen::VectorXd stderr_;
  Eigen::VectorXd t_stat;
  Eigen::VectorXd p_value;
  Eigen::VectorXd fitted;
  Eigen::VectorXd residuals;
  double rmse = 0.0;    // sqrt(mean squared residual)
  double sigma2 = 0.0;  // RSS / (n - k)
  double r_squared = 0.0;
  double loglik = 0.0;  // Gaussian, with the ML variance RSS / n
  int n = 0;
  int k = 0;
};

/// Least squares via column-pivoted Householder QR.
OlsFit ols_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, bool intercept);

/// Indices of columns that add no rank when taken left to right.
std::vector<int> dependent_columns(const Eigen::MatrixXd& x, double tol = 1e-10);

}  // namespace trustlab::ts
