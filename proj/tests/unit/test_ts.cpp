#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "trustlab/rng.hpp"
#include "trustlab/ts/arimax.hpp"
#include "trustlab/ts/arma.hpp"
#include "trustlab/ts/correlogram.hpp"
#include "trustlab/ts/ols.hpp"
#include "trustlab/ts/optimize.hpp"
#include "trustlab/ts/series.hpp"

using namespace trustlab;
using namespace trustlab::ts;

namespace {

// Simulates ARMA(p, q) with a long burn-in; independent of the library.
std::vector<double> simulate_arma(const std::vector<double>& phi, const std::vector<double>& theta,
                                  double sd, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t burn = 500;
  std::vector<double> w(n + burn, 0.0), e(n + burn, 0.0);
  for (std::size_t t = 0; t < n + burn; ++t) {
    e[t] = sd * rng.normal();
    double v = e[t];
    for (std::size_t i = 0; i < phi.size(); ++i) {
      if (t > i) v += phi[i] * w[t - 1 - i];
    }
    for (std::size_t j = 0; j < theta.size(); ++j) {
      if (t > j) v += theta[j] * e[t - 1 - j];
    }
    w[t] = v;
  }
  return {w.begin() + static_cast<long>(burn), w.end()};
}

// Autocovariances from truncated psi weights: gamma(h) = sigma2 sum psi_j psi_{j+h}.
std::vector<double> autocovariance(const std::vector<double>& phi, const std::vector<double>& theta,
                                   double sigma2, std::size_t max_lag) {
  const std::size_t terms = 4000;
  std::vector<double> psi(terms, 0.0);
  psi[0] = 1.0;
  for (std::size_t j = 1; j < terms; ++j) {
    double v = j <= theta.size() ? theta[j - 1] : 0.0;
    for (std::size_t i = 0; i < phi.size() && i < j; ++i) v += phi[i] * psi[j - 1 - i];
    psi[j] = v;
  }
  std::vector<double> g(max_lag + 1, 0.0);
  for (std::size_t h = 0; h <= max_lag; ++h) {
    for (std::size_t j = 0; j + h < terms; ++j) g[h] += psi[j] * psi[j + h];
    g[h] *= sigma2;
  }
  return g;
}

// Log density of y under N(0, Toeplitz(gamma)).
double gaussian_oracle(const std::vector<double>& y, const std::vector<double>& phi,
                       const std::vector<double>& theta, double sigma2) {
  const auto n = static_cast<Eigen::Index>(y.size());
  const auto g = autocovariance(phi, theta, sigma2, y.size());
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) cov(i, j) = g[static_cast<std::size_t>(std::abs(i - j))];
  }
  const Eigen::Map<const Eigen::VectorXd> v(y.data(), n);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double quad = v.dot(llt.solve(v));
  return -0.5 * (n * std::log(2.0 * std::numbers::pi) + log_det + quad);
}

TrustSeries capability_series(const std::vector<int>& levels, const std::vector<double>& values) {
  TrustSeries s;
  const auto n = static_cast<Eigen::Index>(levels.size());
  s.values = values;
  s.capability = Eigen::MatrixXd::Zero(n, 3);
  s.strategy = Eigen::MatrixXd::Zero(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    s.capability(i, levels[static_cast<std::size_t>(i)]) = 1.0;
    s.strategy(i, (i / 7) % 3) = 1.0;
  }
  return s;
}

std::vector<int> random_levels(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> out(n);
  for (auto& l : out) l = static_cast<int>(rng.uniform_int(0, 2));
  return out;
}

}  // namespace

TEST_CASE("ols_fit") {
  SUBCASE("capability dummies without intercept give per-level means") {
    const auto levels = random_levels(63, 1);
    Rng rng(2);
    std::vector<double> y(63);
    for (auto& v : y) v = rng.uniform();
    const TrustSeries s = capability_series(levels, y);
    const OlsFit fit = ols_fit(Eigen::VectorXd(s.y()), s.capability, false);
    for (int c = 0; c < 3; ++c) {
      double sum = 0.0;
      int count = 0;
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (levels[i] == c) {
          sum += y[i];
          ++count;
        }
      }
      CHECK(fit.coefficients(c) == doctest::Approx(sum / count).epsilon(1e-12));
    }
  }
  SUBCASE("constant response with intercept only") {
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(10, 0.625);
    const OlsFit fit = ols_fit(y, Eigen::MatrixXd(10, 0), true);
    CHECK(fit.coefficients(0) == doctest::Approx(0.625));
    CHECK(fit.rmse == doctest::Approx(0.0));
  }
  SUBCASE("matches the normal-equation oracle and projects orthogonally") {
    Rng rng(3);
    Eigen::MatrixXd x(20, 3);
    Eigen::VectorXd y(20);
    for (Eigen::Index i = 0; i < 20; ++i) {
      for (Eigen::Index j = 0; j < 3; ++j) x(i, j) = rng.normal();
      y(i) = rng.normal();
    }
    const OlsFit fit = ols_fit(y, x, false);
    const Eigen::VectorXd oracle = (x.transpose() * x).fullPivLu().inverse() * (x.transpose() * y);
    CHECK((fit.coefficients - oracle).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((x.transpose() * fit.residuals).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(fit.rmse == doctest::Approx(std::sqrt(fit.residuals.squaredNorm() / 20.0)));
    // Standard errors against sigma^2 (X'X)^-1 computed directly.
    const Eigen::MatrixXd cov = fit.sigma2 * (x.transpose() * x).inverse();
    for (int j = 0; j < 3; ++j) CHECK(fit.stderr_(j) == doctest::Approx(std::sqrt(cov(j, j))));
  }
  SUBCASE("collinear strategy and capability dummies are reported") {
    const TrustSeries s = capability_series(random_levels(63, 4), std::vector<double>(63, 0.5));
    try {
      ols_fit(Eigen::VectorXd(s.y()), exog_matrix(s, ExogSelector::both()), false);
      FAIL("expected RankDeficientError");
    } catch (const RankDeficientError& e) {
      CHECK(e.columns() == std::vector<int>{5});
    }
    CHECK_THROWS_AS(ols_fit(Eigen::VectorXd(s.y()), s.capability, true), RankDeficientError);
  }
  SUBCASE("shape errors") {
    CHECK_THROWS_AS(ols_fit(Eigen::VectorXd::Zero(5), Eigen::MatrixXd::Zero(4, 1), false),
                    std::invalid_argument);
  }
}

TEST_CASE("difference") {
  const std::vector<double> y{1, 2, 3, 4};
  CHECK(difference(y, 1) == std::vector<double>{1, 1, 1});
  CHECK(difference(y, 0) == y);
  CHECK(difference(std::vector<double>{0.5, 2.5, 4.5, 6.5, 8.5}, 1) ==
        std::vector<double>{2, 2, 2, 2});
  CHECK(difference(y, 2) == std::vector<double>{0, 0});
  CHECK_THROWS_AS(difference(y, 4), std::invalid_argument);
}

TEST_CASE("acf") {
  SUBCASE("lag zero is one") {
    const auto y = simulate_arma({}, {}, 1.0, 50, 5);
    CHECK(acf(y, 5).values[0] == doctest::Approx(1.0));
    CHECK(acf(y, 5).band == doctest::Approx(1.96 / std::sqrt(50.0)));
  }
  SUBCASE("AR(1) decays geometrically") {
    const auto y = simulate_arma({0.8}, {}, 1.0, 10000, 6);
    const auto r = acf(y, 5);
    for (int k = 1; k <= 5; ++k) CHECK(std::abs(r.values[static_cast<std::size_t>(k)] - std::pow(0.8, k)) < 0.03);
  }
  SUBCASE("alternating sign") {
    std::vector<double> y(1000);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = i % 2 == 0 ? 1.0 : -1.0;
    CHECK(acf(y, 1).values[1] == doctest::Approx(-1.0).epsilon(0.002));
  }
  SUBCASE("degenerate input") {
    CHECK_THROWS_AS(acf(std::vector<double>(10, 3.0), 2), std::domain_error);
    CHECK_THROWS_AS(acf(std::vector<double>{1.0, 2.0}, 2), std::invalid_argument);
  }
}

TEST_CASE("pacf") {
  SUBCASE("AR(1)") {
    const auto y = simulate_arma({0.8}, {}, 1.0, 10000, 7);
    const auto r = pacf(y, 6);
    CHECK(std::abs(r.values[1] - 0.8) < 0.03);
    int inside = 0;
    for (int k = 2; k <= 6; ++k) inside += std::abs(r.values[static_cast<std::size_t>(k)]) <= r.band;
    CHECK(inside >= 4);
  }
  SUBCASE("AR(2) second partial equals phi2") {
    const auto y = simulate_arma({0.4, 0.3}, {}, 1.0, 10000, 8);
    CHECK(std::abs(pacf(y, 3).values[2] - 0.3) < 0.03);
  }
  SUBCASE("white noise stays inside the band at the nominal rate") {
    int inside = 0, total = 0;
    for (std::uint64_t s = 0; s < 50; ++s) {
      const auto r = pacf(simulate_arma({}, {}, 1.0, 400, 100 + s), 10);
      for (int k = 1; k <= 10; ++k) {
        inside += std::abs(r.values[static_cast<std::size_t>(k)]) <= r.band;
        ++total;
      }
    }
    CHECK(static_cast<double>(inside) / total >= 0.90);
  }
  SUBCASE("cutoff after the AR order across seeds") {
    int inside = 0, total = 0;
    for (std::uint64_t s = 0; s < 40; ++s) {
      const auto r = pacf(simulate_arma({0.5, -0.3}, {}, 1.0, 500, 200 + s), 8);
      for (int k = 3; k <= 8; ++k) {
        inside += std::abs(r.values[static_cast<std::size_t>(k)]) <= r.band;
        ++total;
      }
    }
    CHECK(static_cast<double>(inside) / total >= 0.90);
  }
}

TEST_CASE("stationarity transforms") {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = static_cast<std::size_t>(rng.uniform_int(1, 5));
    std::vector<double> raw(p);
    for (auto& r : raw) r = rng.uniform(-2.5, 2.5);
    const auto phi = ar_from_unconstrained(raw);
    REQUIRE(is_stationary(phi));
    const auto back = ar_to_unconstrained(phi);
    for (std::size_t i = 0; i < p; ++i) REQUIRE(back[i] == doctest::Approx(raw[i]).epsilon(1e-8));
    const auto theta = ma_from_unconstrained(raw);
    REQUIRE(is_invertible(theta));
  }
  CHECK_FALSE(is_stationary(std::vector<double>{1.0}));
  CHECK_FALSE(is_stationary(std::vector<double>{0.5, 0.6}));
  CHECK(is_stationary(std::vector<double>{0.5, 0.3}));
  CHECK_FALSE(is_invertible(std::vector<double>{1.2}));
  CHECK(is_invertible(std::vector<double>{-0.7}));
}

TEST_CASE("arma_loglik") {
  SUBCASE("white noise reduces to the iid formula") {
    const auto y = simulate_arma({}, {}, 1.3, 30, 10);
    double expected = 0.0;
    for (double v : y) expected += -0.5 * (std::log(2.0 * std::numbers::pi * 1.69) + v * v / 1.69);
    CHECK(arma_loglik(y, {}, {}, 1.69) == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("matches the full-covariance oracle for p, q in 0..2") {
    const std::vector<std::vector<double>> phis{{}, {0.6}, {0.5, -0.3}};
    const std::vector<std::vector<double>> thetas{{}, {0.4}, {-0.5, 0.25}};
    for (const auto& phi : phis) {
      for (const auto& theta : thetas) {
        for (std::size_t n : {1u, 2u, 15u, 20u}) {
          const auto y = simulate_arma(phi, theta, 0.7, n, 11 + n);
          const double got = arma_loglik(y, phi, theta, 0.49);
          const double want = gaussian_oracle(y, phi, theta, 0.49);
          CHECK_MESSAGE(std::abs(got - want) < 1e-6, "p=", phi.size(), " q=", theta.size(), " n=", n);
        }
      }
    }
  }
  SUBCASE("rejects invalid parameters") {
    const std::vector<double> y{0.1, 0.2, 0.3};
    CHECK_THROWS_AS(arma_loglik(y, std::vector<double>{1.1}, {}, 1.0), std::domain_error);
    CHECK_THROWS_AS(arma_loglik(y, {}, std::vector<double>{-1.5}, 1.0), std::domain_error);
    CHECK_THROWS_AS(arma_loglik(y, {}, {}, 0.0), std::domain_error);
  }
}

TEST_CASE("nelder_mead") {
  auto rosen = [](const std::vector<double>& x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
  };
  const auto r = nelder_mead(rosen, {-1.2, 1.0});
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-5));
  SimplexOptions tight;
  tight.max_evals = 20;
  CHECK_FALSE(nelder_mead(rosen, {-1.2, 1.0}, tight).converged);
}

TEST_CASE("arimax_fit") {
  const auto levels = random_levels(300, 12);
  const std::array<double, 3> beta{0.2, 0.5, 0.8};

  SUBCASE("order (0,0,0) is OLS") {
    Rng rng(13);
    std::vector<double> y(levels.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = beta[static_cast<std::size_t>(levels[i])] + 0.1 * rng.normal();
    const TrustSeries s = capability_series(levels, y);
    const ArimaxFit fit = arimax_fit(s, {0, 0, 0});
    const OlsFit ols = ols_fit(Eigen::VectorXd(s.y()), s.capability, false);
    CHECK((fit.beta - ols.coefficients).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(fit.loglik == doctest::Approx(ols.loglik).epsilon(1e-10));
    CHECK(fit.one_step_rmse == doctest::Approx(ols.rmse).epsilon(1e-10));
    CHECK(fit.n_params == 4);
    CHECK(fit.aic == doctest::Approx(2.0 * 4 - 2.0 * fit.loglik));
    for (int j = 0; j < 3; ++j) {
      // ML standard errors use RSS / n rather than RSS / (n - k).
      const double scale = std::sqrt(static_cast<double>(ols.n - ols.k) / ols.n);
      CHECK(fit.beta_se(j) == doctest::Approx(ols.stderr_(j) * scale).epsilon(1e-3));
    }
  }

  SUBCASE("AR(1) errors are recovered and fits are deterministic") {
    const auto w = simulate_arma({0.6}, {}, 0.05, levels.size(), 14);
    std::vector<double> y(levels.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = beta[static_cast<std::size_t>(levels[i])] + w[i];
    const TrustSeries s = capability_series(levels, y);
    FitOptions opts;
    opts.seed = 77;
    const ArimaxFit fit = arimax_fit(s, {1, 0, 0}, ExogSelector::capability_only(), opts);
    CHECK(fit.converged);
    CHECK(std::abs(fit.phi[0] - 0.6) < 3.0 * fit.phi_se[0]);
    for (int j = 0; j < 3; ++j) CHECK(std::abs(fit.beta(j) - beta[static_cast<std::size_t>(j)]) < 3.0 * fit.beta_se(j));
    const ArimaxFit again = arimax_fit(s, {1, 0, 0}, ExogSelector::capability_only(), opts);
    CHECK(again.phi == fit.phi);
    CHECK(again.beta == fit.beta);
    CHECK(again.loglik == fit.loglik);

    const OneStepForecast fc = forecast_one_step(fit, s);
    CHECK(fc.offset == 0);
    CHECK(fc.rmse == doctest::Approx(fit.one_step_rmse).epsilon(1e-14));
    CHECK(cross_validate(fit, s) == doctest::Approx(fit.one_step_rmse).epsilon(1e-14));
    const OlsFit ols = ols_fit(Eigen::VectorXd(s.y()), s.capability, false);
    CHECK(fit.one_step_rmse < ols.rmse);
  }

  SUBCASE("differenced fit pins the level and forecasts on the original scale") {
    const auto w = simulate_arma({0.5}, {}, 0.03, levels.size(), 15);
    std::vector<double> y(levels.size());
    double level = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      level += w[i];
      y[i] = beta[static_cast<std::size_t>(levels[i])] + level;
    }
    const TrustSeries s = capability_series(levels, y);
    const ArimaxFit fit = arimax_fit(s, {1, 1, 0});
    CHECK(fit.level_normalized);
    CHECK(fit.n_params == 5);
    CHECK(std::abs(fit.phi[0] - 0.5) < 3.0 * fit.phi_se[0]);
    // Contrasts are identified even though the level is not.
    CHECK(std::abs((fit.beta(2) - fit.beta(0)) - 0.6) < 3.0 * (fit.beta_se(2) + fit.beta_se(0)));
    const Eigen::VectorXd eta = Eigen::VectorXd(s.y()) - s.capability * fit.beta;
    CHECK(std::abs(eta.mean()) < 1e-10);
    const OneStepForecast fc = forecast_one_step(fit, s);
    CHECK(fc.offset == 1);
    CHECK(fc.predicted.size() == y.size() - 1);
    CHECK(fc.rmse == doctest::Approx(fit.one_step_rmse));

    ArimaxFit shifted = fit;
    shifted.beta.array() += 0.37;  // the differenced model cannot see a level shift
    CHECK(forecast_one_step(shifted, s).rmse == doctest::Approx(fc.rmse).epsilon(1e-12));
  }

  SUBCASE("errors") {
    const TrustSeries s = capability_series(random_levels(10, 1), std::vector<double>(10, 0.5));
    CHECK_THROWS_AS(arimax_fit(s, {2, 1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(arimax_fit(s, {0, 2, 0}), std::invalid_argument);
    const TrustSeries big = capability_series(random_levels(80, 2), simulate_arma({}, {}, 1.0, 80, 3));
    CHECK_THROWS_AS(arimax_fit(big, {0, 0, 0}, ExogSelector::both()), RankDeficientError);
  }
}

TEST_CASE("forecast_one_step") {
  const auto levels = random_levels(200, 20);
  SUBCASE("without ARMA terms the prediction is the regression") {
    const TrustSeries s = capability_series(levels, simulate_arma({}, {}, 1.0, 200, 21));
    ArimaxFit fit;
    fit.exog = ExogSelector::capability_only();
    fit.beta = Eigen::Vector3d(0.1, 0.2, 0.3);
    const OneStepForecast fc = forecast_one_step(fit, s);
    const Eigen::VectorXd xb = s.capability * fit.beta;
    for (std::size_t i = 0; i < fc.predicted.size(); ++i) CHECK(fc.predicted[i] == xb(static_cast<Eigen::Index>(i)));
    // White-noise model: RMSE is the root mean square around beta'x.
    CHECK(fc.rmse == doctest::Approx(std::sqrt((Eigen::VectorXd(s.y()) - xb).squaredNorm() / 200.0)));
  }
  SUBCASE("noiseless AR(1) data are predicted exactly after the first step") {
    std::vector<double> eta(200);
    eta[0] = 0.4;
    for (std::size_t t = 1; t < eta.size(); ++t) eta[t] = 0.7 * eta[t - 1];
    std::vector<double> y(200);
    for (std::size_t t = 0; t < y.size(); ++t) y[t] = 0.5 + eta[t];
    TrustSeries s = capability_series(std::vector<int>(200, 1), y);
    ArimaxFit fit;
    fit.exog = ExogSelector::capability_only();
    fit.beta = Eigen::Vector3d(0.0, 0.5, 0.0);
    fit.phi = {0.7};
    const OneStepForecast fc = forecast_one_step(fit, s);
    for (std::size_t t = 1; t < y.size(); ++t) CHECK(std::abs(fc.predicted[t] - y[t]) < 1e-12);
  }
  SUBCASE("exog mismatch") {
    ArimaxFit fit;
    fit.beta = Eigen::VectorXd::Zero(2);
    const TrustSeries s = capability_series(levels, std::vector<double>(200, 0.5));
    CHECK_THROWS_AS(forecast_one_step(fit, s), std::invalid_argument);
  }
}

TEST_CASE("aic_grid") {
  SUBCASE("shape, formula and selection on ARIMA(1,1,0)") {
    const auto w = simulate_arma({0.8}, {}, 1.0, 400, 30);
    Eigen::VectorXd y(400);
    double level = 0.0;
    for (Eigen::Index i = 0; i < 400; ++i) {
      level += w[static_cast<std::size_t>(i)];
      y(i) = level;
    }
    const AicTable t = aic_grid(y, Eigen::MatrixXd(400, 0), int_range(0, 2), int_range(0, 2), 1);
    REQUIRE(t.aic.size() == 3);
    REQUIRE(t.aic[0].size() == 3);
    REQUIRE(t.aic[1][0].has_value());
    REQUIRE(t.aic[0][0].has_value());
    CHECK(*t.aic[1][0] < *t.aic[0][0]);
    REQUIRE(t.best.has_value());
    CHECK(t.best->d == 1);
    const ArimaxFit f = arimax_fit(y, Eigen::MatrixXd(400, 0), {1, 1, 0});
    CHECK(*t.aic[1][0] == doctest::Approx(2.0 * 2 - 2.0 * f.loglik));
  }
  SUBCASE("5x5 default table on a trust-sized series") {
    const TrustSeries s = capability_series(random_levels(63, 31), simulate_arma({0.5}, {}, 0.05, 63, 32));
    const AicTable t = aic_grid(s, int_range(0, 4), int_range(0, 4), 1);
    CHECK(t.aic.size() == 5);
    for (const auto& row : t.aic) CHECK(row.size() == 5);
    CHECK(t.best.has_value());
  }
  SUBCASE("failed cells are recorded, not fatal") {
    const TrustSeries s = capability_series(random_levels(14, 33), simulate_arma({}, {}, 1.0, 14, 34));
    const AicTable t = aic_grid(s, int_range(0, 6), int_range(0, 1), 1);
    CHECK(t.aic[0][0].has_value());
    CHECK_FALSE(t.aic[6][1].has_value());
    CHECK_FALSE(t.errors[6][1].empty());
  }
}
