#include "trustlab/ts/ols.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

namespace trustlab::ts {

std::vector<int> dependent_columns(const Eigen::MatrixXd& x, double tol) {
  std::vector<int> dependent;
  Eigen::MatrixXd kept(x.rows(), 0);
  Eigen::Index rank = 0;
  const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    Eigen::MatrixXd trial(x.rows(), kept.cols() + 1);
    trial << kept, x.col(j);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(trial);
    qr.setThreshold(tol * scale);
    if (qr.rank() > rank) {
      kept = std::move(trial);
      rank = qr.rank();
    } else {
      dependent.push_back(static_cast<int>(j));
    }
  }
  return dependent;
}

OlsFit ols_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& x_in, bool intercept) {
  if (y.size() != x_in.rows()) {
    throw std::invalid_argument(fmt::format("ols_fit: {} observations but {} design rows",
                                            y.size(), x_in.rows()));
  }
  Eigen::MatrixXd x(x_in.rows(), x_in.cols() + (intercept ? 1 : 0));
  if (intercept) {
    x << Eigen::VectorXd::Ones(x_in.rows()), x_in;
  } else {
    x = x_in;
  }
  const auto n = static_cast<int>(x.rows());
  const auto k = static_cast<int>(x.cols());
  if (k == 0) throw std::invalid_argument("ols_fit: empty design");
  if (n <= k) throw std::invalid_argument("ols_fit: need more observations than columns");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < k) {
    std::vector<int> bad = dependent_columns(x);
    if (intercept) {
      for (int& c : bad) --c;  // report in caller's column numbering; -1 is the intercept
    }
    throw RankDeficientError(
        fmt::format("ols_fit: design has rank {} < {}; dependent columns {}", qr.rank(), k,
                    fmt::join(bad, ",")),
        bad);
  }

  OlsFit fit;
  fit.intercept = intercept;
  fit.n = n;
  fit.k = k;
  fit.coefficients = qr.solve(y);
  fit.fitted = x * fit.coefficients;
  fit.residuals = y - fit.fitted;
  const double rss = fit.residuals.squaredNorm();
  fit.rmse = std::sqrt(rss / n);
  fit.sigma2 = rss / (n - k);
  const double tss = (y.array() - y.mean()).square().sum();
  fit.r_squared = tss > 0.0 ? 1.0 - rss / tss : 0.0;
  const double s2_ml = rss / n;
  fit.loglik = s2_ml > 0.0 ? -0.5 * n * (std::log(2.0 * std::numbers::pi * s2_ml) + 1.0)
                           : std::numeric_limits<double>::infinity();

  // (X'X)^-1 = P R^-1 R^-T P'
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd xtx_inv_perm = r_inv * r_inv.transpose();
  const Eigen::MatrixXd xtx_inv =
      qr.colsPermutation() * xtx_inv_perm * qr.colsPermutation().transpose();

  fit.stderr_ = (fit.sigma2 * xtx_inv.diagonal()).cwiseSqrt();
  fit.t_stat = fit.coefficients.cwiseQuotient(fit.stderr_);
  fit.p_value.resize(k);
  const boost::math::students_t dist(n - k);
  for (int i = 0; i < k; ++i) {
    const double t = fit.t_stat(i);
    fit.p_value(i) = std::isfinite(t) ? 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)))
                                      : 0.0;
  }
  return fit;
}

}  // namespace trustlab::ts
