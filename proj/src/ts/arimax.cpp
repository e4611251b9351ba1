#include "trustlab/ts/arimax.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <future>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "trustlab/rng.hpp"
#include "trustlab/ts/arma.hpp"
#include "trustlab/ts/ols.hpp"

namespace trustlab::ts {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::VectorXd diff(const Eigen::VectorXd& v, int d) {
  Eigen::VectorXd out = v;
  for (int k = 0; k < d; ++k) out = (out.tail(out.size() - 1) - out.head(out.size() - 1)).eval();
  return out;
}

Eigen::MatrixXd diff_rows(const Eigen::MatrixXd& m, int d) {
  Eigen::MatrixXd out = m;
  for (int k = 0; k < d; ++k) {
    out = (out.bottomRows(out.rows() - 1) - out.topRows(out.rows() - 1)).eval();
  }
  return out;
}

// Response and regressors on the differenced scale, with the regression
// reduced to identified columns.
struct Problem {
  Eigen::VectorXd y;
  Eigen::MatrixXd x;
  int d = 0;
  Eigen::VectorXd yd;
  Eigen::MatrixXd xd;  // identified columns only
  bool level_free = false;
  double row_sum = 0.0;
};

Problem make_problem(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, int d) {
  Problem pr;
  pr.y = y;
  pr.x = x;
  pr.d = d;
  const auto k = x.cols();
  if (k > 0) {
    const auto bad = dependent_columns(x);
    if (!bad.empty()) {
      throw RankDeficientError("arimax_fit: regressors are collinear", bad);
    }
  }
  pr.yd = diff(y, d);
  pr.xd = diff_rows(x, d);
  if (d > 0 && k > 0 && !dependent_columns(pr.xd).empty()) {
    const Eigen::VectorXd sums = x.rowwise().sum();
    const bool constant_rows = (sums.array() - sums(0)).abs().maxCoeff() < 1e-12 && sums(0) != 0.0;
    const auto bad = dependent_columns(pr.xd.leftCols(k - 1));
    if (!constant_rows || !bad.empty()) {
      throw RankDeficientError("arimax_fit: differenced regressors are collinear",
                               dependent_columns(pr.xd));
    }
    pr.level_free = true;
    pr.row_sum = sums(0);
    pr.xd = pr.xd.leftCols(k - 1).eval();
  }
  return pr;
}

struct Profile {
  double loglik = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd beta;  // identified columns
  double sigma2 = kNaN;
};

// Log-likelihood maximized over beta and sigma2 for fixed ARMA coefficients.
Profile profile_loglik(const Problem& pr, const std::vector<double>& phi,
                       const std::vector<double>& theta) {
  const auto m = pr.yd.size();
  const auto k = pr.xd.cols();
  Eigen::MatrixXd data(m, 1 + k);
  data.col(0) = pr.yd;
  if (k > 0) data.rightCols(k) = pr.xd;
  const FilterResult f = arma_filter(data, phi, theta);
  const Eigen::ArrayXd w = f.variances.array().rsqrt();
  Eigen::VectorXd b = f.innovations.col(0).array() * w;
  Profile out;
  out.beta = Eigen::VectorXd::Zero(k);
  if (k > 0) {
    const Eigen::MatrixXd a = f.innovations.rightCols(k).array().colwise() * w;
    out.beta = a.colPivHouseholderQr().solve(b);
    b -= a * out.beta;
  }
  out.sigma2 = b.squaredNorm() / static_cast<double>(m);
  const double log_det = f.variances.array().log().sum();
  out.loglik = -0.5 * static_cast<double>(m) * (std::log(2.0 * std::numbers::pi * out.sigma2) + 1.0) -
               0.5 * log_det;
  return out;
}

struct ArmaCoefs {
  std::vector<double> phi;
  std::vector<double> theta;
};

ArmaCoefs unpack(const std::vector<double>& raw, int p) {
  const auto mid = raw.begin() + p;
  return {ar_from_unconstrained(std::vector<double>(raw.begin(), mid)),
          ma_from_unconstrained(std::vector<double>(mid, raw.end()))};
}

// Full log-likelihood in natural parameters (beta_identified, phi, theta, sigma2).
double full_loglik(const Problem& pr, const ArimaOrder& order, const Eigen::VectorXd& params) {
  const auto k = pr.xd.cols();
  const Eigen::VectorXd beta = params.head(k);
  std::vector<double> phi(params.data() + k, params.data() + k + order.p);
  std::vector<double> theta(params.data() + k + order.p, params.data() + k + order.p + order.q);
  const double sigma2 = params(params.size() - 1);
  Eigen::VectorXd resid = pr.yd;
  if (k > 0) resid -= pr.xd * beta;
  try {
    return arma_loglik(std::span<const double>(resid.data(), static_cast<std::size_t>(resid.size())),
                       phi, theta, sigma2);
  } catch (const std::domain_error&) {
    return kNaN;
  }
}

// Covariance of the natural parameters from the central-difference Hessian.
std::optional<Eigen::MatrixXd> hessian_covariance(const Problem& pr, const ArimaOrder& order,
                                                  const Eigen::VectorXd& at) {
  const auto np = at.size();
  Eigen::VectorXd h(np);
  for (Eigen::Index i = 0; i < np; ++i) {
    const bool is_sigma2 = i == np - 1;
    h(i) = 1e-4 * (is_sigma2 ? std::abs(at(i)) : std::max(std::abs(at(i)), 1e-2));
  }
  auto f = [&](const Eigen::VectorXd& x) { return full_loglik(pr, order, x); };
  const double f0 = f(at);
  Eigen::MatrixXd hess(np, np);
  for (Eigen::Index i = 0; i < np; ++i) {
    Eigen::VectorXd xp = at, xm = at;
    xp(i) += h(i);
    xm(i) -= h(i);
    hess(i, i) = (f(xp) - 2.0 * f0 + f(xm)) / (h(i) * h(i));
    for (Eigen::Index j = 0; j < i; ++j) {
      Eigen::VectorXd pp = at, pm = at, mp = at, mm = at;
      pp(i) += h(i), pp(j) += h(j);
      pm(i) += h(i), pm(j) -= h(j);
      mp(i) -= h(i), mp(j) += h(j);
      mm(i) -= h(i), mm(j) -= h(j);
      hess(i, j) = hess(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h(i) * h(j));
    }
  }
  if (!hess.allFinite()) return std::nullopt;
  const Eigen::MatrixXd info = -hess;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::nullopt;
  Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(np, np));
  if (!cov.allFinite() || (cov.diagonal().array() < 0.0).any()) return std::nullopt;
  return cov;
}

std::vector<double> take(const Eigen::VectorXd& v, Eigen::Index from, Eigen::Index count) {
  return std::vector<double>(v.data() + from, v.data() + from + count);
}

}  // namespace

void ArimaOrder::validate() const {
  if (p < 0 || q < 0) throw std::invalid_argument("ArimaOrder: p and q must be non-negative");
  if (d != 0 && d != 1) throw std::invalid_argument("ArimaOrder: d must be 0 or 1");
}

double aic_value(double loglik, int n_params) { return 2.0 * n_params - 2.0 * loglik; }

std::vector<int> int_range(int lo, int hi) {
  std::vector<int> out;
  for (int v = lo; v <= hi; ++v) out.push_back(v);
  return out;
}

ArimaxFit arimax_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, ArimaOrder order,
                     const FitOptions& opts) {
  order.validate();
  if (x.rows() != y.size()) throw std::invalid_argument("arimax_fit: y and x row counts differ");
  const auto k = static_cast<int>(x.cols());
  const int needed = order.p + order.q + order.d + k + 5;
  if (y.size() <= needed) {
    throw std::invalid_argument(fmt::format("arimax_fit: {} observations, need more than {}",
                                            y.size(), needed));
  }
  const Problem pr = make_problem(y, x, order.d);

  // Restart streams depend only on (seed, order) so grid cells are independent.
  Rng rng(derive_seed(opts.seed, {static_cast<std::uint64_t>(order.p),
                                  static_cast<std::uint64_t>(order.d),
                                  static_cast<std::uint64_t>(order.q)}));
  const int dims = order.p + order.q;
  auto objective = [&](const std::vector<double>& raw) {
    const ArmaCoefs c = unpack(raw, order.p);
    return -profile_loglik(pr, c.phi, c.theta).loglik;
  };

  SimplexResult best;
  best.value = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  bool any_converged = false;
  const int runs = dims == 0 ? 1 : std::max(1, opts.restarts);
  for (int run = 0; run < runs; ++run) {
    std::vector<double> start(static_cast<std::size_t>(dims), 0.0);
    if (run > 0) {
      for (double& s : start) s = rng.uniform(-1.0, 1.0);
    }
    SimplexResult r = nelder_mead(objective, start, opts.simplex);
    evaluations += r.evals;
    any_converged = any_converged || r.converged;
    if (r.value < best.value) best = std::move(r);
  }
  if (!std::isfinite(best.value)) {
    throw std::runtime_error("arimax_fit: likelihood is not finite at any start");
  }

  ArimaxFit fit;
  fit.order = order;
  fit.exog = ExogSelector::none();
  for (int j = 0; j < k; ++j) fit.exog_names.push_back(fmt::format("col{}", j));
  const ArmaCoefs coefs = unpack(best.x, order.p);
  const Profile prof = profile_loglik(pr, coefs.phi, coefs.theta);
  fit.phi = coefs.phi;
  fit.theta = coefs.theta;
  fit.sigma2 = prof.sigma2;
  fit.loglik = prof.loglik;
  fit.n_params = order.p + order.q + k + 1;
  fit.aic = aic_value(fit.loglik, fit.n_params);
  fit.converged = any_converged;
  fit.evaluations = evaluations;
  fit.level_normalized = pr.level_free;

  // Map identified coefficients to the reported beta: beta = A * b + offset.
  const auto ki = pr.xd.cols();
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(k, ki);
  Eigen::VectorXd offset = Eigen::VectorXd::Zero(k);
  if (pr.level_free) {
    const Eigen::RowVectorXd xbar = pr.x.colwise().mean();
    const double ybar = pr.y.mean();
    for (Eigen::Index i = 0; i < ki; ++i) a.col(i).array() -= xbar(i) / pr.row_sum;
    offset.setConstant(ybar / pr.row_sum);
  }
  fit.beta = a * prof.beta + offset;

  const Eigen::Index np = ki + order.p + order.q + 1;
  fit.beta_se = Eigen::VectorXd::Constant(k, kNaN);
  fit.phi_se.assign(static_cast<std::size_t>(order.p), kNaN);
  fit.theta_se.assign(static_cast<std::size_t>(order.q), kNaN);
  fit.sigma2_se = kNaN;
  if (opts.standard_errors && fit.sigma2 > 0.0) {
    Eigen::VectorXd at(np);
    at.head(ki) = prof.beta;
    for (int i = 0; i < order.p; ++i) at(ki + i) = fit.phi[static_cast<std::size_t>(i)];
    for (int j = 0; j < order.q; ++j) at(ki + order.p + j) = fit.theta[static_cast<std::size_t>(j)];
    at(np - 1) = fit.sigma2;
    if (const auto cov = hessian_covariance(pr, order, at)) {
      const Eigen::MatrixXd beta_cov = a * cov->topLeftCorner(ki, ki) * a.transpose();
      fit.beta_se = beta_cov.diagonal().cwiseMax(0.0).cwiseSqrt();
      const Eigen::VectorXd se = cov->diagonal().cwiseSqrt();
      fit.phi_se = take(se, ki, order.p);
      fit.theta_se = take(se, ki + order.p, order.q);
      fit.sigma2_se = se(np - 1);
    }
  }

  const OneStepForecast fc = forecast_one_step(fit, y, x);
  fit.residuals.resize(fc.predicted.size());
  for (std::size_t i = 0; i < fc.predicted.size(); ++i) {
    fit.residuals[i] = y(static_cast<Eigen::Index>(fc.offset + i)) - fc.predicted[i];
  }
  fit.one_step_rmse = fc.rmse;
  return fit;
}

ArimaxFit arimax_fit(const TrustSeries& y, ArimaOrder order, ExogSelector exog,
                     const FitOptions& opts) {
  y.validate();
  ArimaxFit fit = arimax_fit(Eigen::VectorXd(y.y()), exog_matrix(y, exog), order, opts);
  fit.exog = exog;
  fit.exog_names = exog_names(exog);
  return fit;
}

OneStepForecast forecast_one_step(const ArimaxFit& fit, const Eigen::VectorXd& y,
                                  const Eigen::MatrixXd& x) {
  if (x.cols() != fit.beta.size() || x.rows() != y.size()) {
    throw std::invalid_argument(fmt::format(
        "forecast_one_step: exog is {}x{}, fit expects {} columns for {} observations", x.rows(),
        x.cols(), fit.beta.size(), y.size()));
  }
  const int d = fit.order.d;
  if (y.size() <= d) throw std::invalid_argument("forecast_one_step: series too short");
  const Eigen::VectorXd xb = x * fit.beta;
  const Eigen::VectorXd noise = diff(y - xb, d);
  const FilterResult f = arma_filter(noise, fit.phi, fit.theta);

  OneStepForecast out;
  out.offset = static_cast<std::size_t>(d);
  out.predicted.resize(static_cast<std::size_t>(noise.size()));
  double ss = 0.0;
  for (Eigen::Index i = 0; i < noise.size(); ++i) {
    const Eigen::Index t = i + d;
    // d = 1: y_t = y_{t-1} + (xb_t - xb_{t-1}) + predicted differenced noise.
    const double base = d == 0 ? xb(t) : y(t - 1) + xb(t) - xb(t - 1);
    const double pred = base + f.predictions(i, 0);
    out.predicted[static_cast<std::size_t>(i)] = pred;
    ss += (y(t) - pred) * (y(t) - pred);
  }
  out.rmse = std::sqrt(ss / static_cast<double>(noise.size()));
  return out;
}

OneStepForecast forecast_one_step(const ArimaxFit& fit, const TrustSeries& y) {
  y.validate();
  return forecast_one_step(fit, Eigen::VectorXd(y.y()), exog_matrix(y, fit.exog));
}

double cross_validate(const ArimaxFit& fit, const TrustSeries& other) {
  return forecast_one_step(fit, other).rmse;
}

AicTable aic_grid(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                  const std::vector<int>& p_values, const std::vector<int>& q_values, int d,
                  const FitOptions& opts) {
  if (p_values.empty() || q_values.empty()) throw std::invalid_argument("aic_grid: empty range");
  AicTable table;
  table.d = d;
  table.p_values = p_values;
  table.q_values = q_values;
  const std::size_t rows = p_values.size();
  const std::size_t cols = q_values.size();
  table.aic.assign(rows, std::vector<std::optional<double>>(cols));
  table.errors.assign(rows, std::vector<std::string>(cols));

  auto fit_cell = [&](std::size_t i, std::size_t j) {
    FitOptions cell_opts = opts;
    cell_opts.standard_errors = false;
    try {
      const ArimaxFit f = arimax_fit(y, x, {p_values[i], d, q_values[j]}, cell_opts);
      table.aic[i][j] = f.aic;
      if (!f.converged) table.errors[i][j] = "not converged";
    } catch (const std::exception& e) {
      table.errors[i][j] = e.what();
    }
  };

  // Cells write disjoint slots, so the result does not depend on scheduling.
  const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  if (workers == 1) {
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) fit_cell(i, j);
    }
  } else {
    std::vector<std::future<void>> jobs;
    std::atomic<std::size_t> next{0};
    for (std::size_t w = 0; w < std::min(workers, rows * cols); ++w) {
      jobs.push_back(std::async(std::launch::async, [&] {
        for (std::size_t c = next++; c < rows * cols; c = next++) fit_cell(c / cols, c % cols);
      }));
    }
    for (auto& j : jobs) j.get();
  }

  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (!table.aic[i][j]) continue;
      const ArimaOrder cand{p_values[i], d, q_values[j]};
      if (!table.best) {
        table.best = cand;
        continue;
      }
      const auto& b = *table.best;
      const double cur = *table.aic[i][j];
      const auto bi = static_cast<std::size_t>(
          std::find(p_values.begin(), p_values.end(), b.p) - p_values.begin());
      const auto bj = static_cast<std::size_t>(
          std::find(q_values.begin(), q_values.end(), b.q) - q_values.begin());
      const double best_aic = *table.aic[bi][bj];
      const bool better =
          cur < best_aic ||
          (cur == best_aic && (cand.p + cand.q < b.p + b.q ||
                               (cand.p + cand.q == b.p + b.q && cand.p < b.p)));
      if (better) table.best = cand;
    }
  }
  return table;
}

AicTable aic_grid(const TrustSeries& y, const std::vector<int>& p_values,
                  const std::vector<int>& q_values, int d, ExogSelector exog,
                  const FitOptions& opts) {
  y.validate();
  return aic_grid(Eigen::VectorXd(y.y()), exog_matrix(y, exog), p_values, q_values, d, opts);
}

}  // namespace trustlab::ts
