#include "trustlab/ts/arma.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace trustlab::ts {
namespace {

// Partial autocorrelations from AR coefficients (step-down recursion).
// Returns false if some |kappa| >= 1.
bool step_down(std::span<const double> phi, std::vector<double>* kappa_out) {
  std::vector<double> a(phi.begin(), phi.end());
  std::vector<double> kappa(a.size());
  for (std::size_t k = a.size(); k-- > 0;) {
    const double kk = a[k];
    if (!(std::abs(kk) < 1.0)) return false;
    kappa[k] = kk;
    const double denom = 1.0 - kk * kk;
    std::vector<double> next(k);
    for (std::size_t j = 0; j < k; ++j) next[j] = (a[j] + kk * a[k - 1 - j]) / denom;
    a = std::move(next);
  }
  if (kappa_out) *kappa_out = std::move(kappa);
  return true;
}

std::vector<double> step_up(std::span<const double> kappa) {
  std::vector<double> phi;
  for (std::size_t k = 0; k < kappa.size(); ++k) {
    std::vector<double> next(k + 1);
    for (std::size_t j = 0; j < k; ++j) next[j] = phi[j] - kappa[k] * phi[k - 1 - j];
    next[k] = kappa[k];
    phi = std::move(next);
  }
  return phi;
}

std::vector<double> negated(std::span<const double> v) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](double x) { return -x; });
  return out;
}

struct StateSpace {
  Eigen::MatrixXd transition;
  Eigen::VectorXd loading;  // R: (1, theta_1, ..., theta_{r-1})
  Eigen::MatrixXd initial_cov;
};

StateSpace make_state_space(std::span<const double> phi, std::span<const double> theta) {
  const auto r = static_cast<Eigen::Index>(std::max(phi.size(), theta.size() + 1));
  StateSpace ss;
  ss.transition = Eigen::MatrixXd::Zero(r, r);
  for (std::size_t i = 0; i < phi.size(); ++i) ss.transition(static_cast<Eigen::Index>(i), 0) = phi[i];
  for (Eigen::Index i = 0; i + 1 < r; ++i) ss.transition(i, i + 1) = 1.0;
  ss.loading = Eigen::VectorXd::Zero(r);
  ss.loading(0) = 1.0;
  for (std::size_t j = 0; j < theta.size(); ++j) ss.loading(static_cast<Eigen::Index>(j) + 1) = theta[j];

  // Stationary covariance: vec(P) = (I - T (x) T)^-1 vec(R R').
  const Eigen::MatrixXd q = ss.loading * ss.loading.transpose();
  const Eigen::Index r2 = r * r;
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(r2, r2);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < r; ++j) {
      const double tij = ss.transition(i, j);
      if (tij == 0.0) continue;
      system.block(i * r, j * r, r, r) -= tij * ss.transition;
    }
  }
  // Column-major vec: vec(T P T') = (T (x) T) vec(P) with block (i,j) = T(i,j) T.
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(q.data(), r2);
  const Eigen::VectorXd vec_p = system.partialPivLu().solve(rhs);
  ss.initial_cov = Eigen::Map<const Eigen::MatrixXd>(vec_p.data(), r, r);
  ss.initial_cov = 0.5 * (ss.initial_cov + ss.initial_cov.transpose());
  return ss;
}

}  // namespace

bool is_stationary(std::span<const double> phi) { return step_down(phi, nullptr); }

bool is_invertible(std::span<const double> theta) { return step_down(negated(theta), nullptr); }

std::vector<double> ar_from_unconstrained(std::span<const double> raw) {
  std::vector<double> kappa(raw.size());
  std::transform(raw.begin(), raw.end(), kappa.begin(), [](double x) { return std::tanh(x); });
  return step_up(kappa);
}

std::vector<double> ar_to_unconstrained(std::span<const double> phi) {
  std::vector<double> kappa;
  if (!step_down(phi, &kappa)) throw std::domain_error("AR coefficients are not stationary");
  for (double& k : kappa) k = std::atanh(k);
  return kappa;
}

std::vector<double> ma_from_unconstrained(std::span<const double> raw) {
  return negated(ar_from_unconstrained(raw));
}

std::vector<double> ma_to_unconstrained(std::span<const double> theta) {
  return ar_to_unconstrained(negated(theta));
}

FilterResult arma_filter(const Eigen::MatrixXd& data, std::span<const double> phi,
                         std::span<const double> theta) {
  const StateSpace ss = make_state_space(phi, theta);
  const Eigen::Index r = ss.transition.rows();
  const Eigen::Index n = data.rows();
  const Eigen::Index s = data.cols();
  const Eigen::MatrixXd q = ss.loading * ss.loading.transpose();

  FilterResult out;
  out.innovations.resize(n, s);
  out.predictions.resize(n, s);
  out.variances.resize(n);

  Eigen::MatrixXd state = Eigen::MatrixXd::Zero(r, s);
  Eigen::MatrixXd cov = ss.initial_cov;
  Eigen::VectorXd gain(r);
  bool steady = false;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double f = cov(0, 0);
    out.variances(t) = f;
    out.predictions.row(t) = state.row(0);
    out.innovations.row(t) = data.row(t) - state.row(0);
    if (!steady) gain = cov.col(0) / f;
    state += gain * out.innovations.row(t);
    state = ss.transition * state;
    if (!steady) {
      Eigen::MatrixXd updated = cov - gain * cov.row(0);
      Eigen::MatrixXd next = ss.transition * updated * ss.transition.transpose() + q;
      // Once the predicted covariance stops moving the remaining steps reuse it.
      steady = (next - cov).cwiseAbs().maxCoeff() < 1e-14 * std::max(1.0, next(0, 0));
      cov = std::move(next);
    }
  }
  return out;
}

double arma_loglik(std::span<const double> y, std::span<const double> phi,
                   std::span<const double> theta, double sigma2) {
  if (!is_stationary(phi)) throw std::domain_error("arma_loglik: AR part is not stationary");
  if (!is_invertible(theta)) throw std::domain_error("arma_loglik: MA part is not invertible");
  if (!(sigma2 > 0.0)) throw std::domain_error("arma_loglik: sigma2 must be positive");
  const Eigen::Map<const Eigen::VectorXd> data(y.data(), static_cast<Eigen::Index>(y.size()));
  const FilterResult f = arma_filter(data, phi, theta);
  double ll = 0.0;
  for (Eigen::Index t = 0; t < f.variances.size(); ++t) {
    const double var = sigma2 * f.variances(t);
    const double v = f.innovations(t, 0);
    ll -= 0.5 * (std::log(2.0 * std::numbers::pi * var) + v * v / var);
  }
  return ll;
}

}  // namespace trustlab::ts
