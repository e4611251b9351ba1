#include "trustlab/pipeline/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include <fmt/format.h>

namespace trustlab::pipeline {
namespace {

GroupAnalysis analyze_group(const ts::TrustSeries& s, const AnalysisOptions& opt) {
  s.validate();
  GroupAnalysis g;
  g.group = s.group;
  g.series = s;
  g.ols = ts::ols_fit(Eigen::VectorXd(s.y()), s.capability, false);
  const std::vector<double> resid(g.ols.residuals.data(), g.ols.residuals.data() + g.ols.residuals.size());
  const int lags = std::min<int>(opt.max_lag, static_cast<int>(resid.size()) - 1);
  try {
    g.residual_acf = ts::acf(resid, lags);
    g.residual_pacf = ts::pacf(resid, lags);
  } catch (const std::domain_error&) {
    // Perfect fit: residuals carry no correlation structure to report.
  }
  g.aic = ts::aic_grid(s, opt.p_values, opt.q_values, opt.d, ts::ExogSelector::capability_only(), opt.fit);
  if (!g.aic.best) {
    g.arimax_error = "no order in the grid could be fitted";
    return g;
  }
  try {
    g.arimax = ts::arimax_fit(s, *g.aic.best, ts::ExogSelector::capability_only(), opt.fit);
    g.predictions = ts::forecast_one_step(*g.arimax, s);
  } catch (const std::exception& e) {
    g.arimax.reset();
    g.arimax_error = e.what();
  }
  return g;
}

nlohmann::json nullable(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::json vec_json(const Eigen::VectorXd& v) {
  auto out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(nullable(v(i)));
  return out;
}

nlohmann::json vec_json(const std::vector<double>& v) {
  auto out = nlohmann::json::array();
  for (double x : v) out.push_back(nullable(x));
  return out;
}

std::vector<std::string> level_labels(const Eigen::MatrixXd& onehot, const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (Eigen::Index i = 0; i < onehot.rows(); ++i) {
    Eigen::Index j = 0;
    onehot.row(i).maxCoeff(&j);
    out.push_back(names[static_cast<std::size_t>(j)]);
  }
  return out;
}

nlohmann::json arimax_json(const ts::ArimaxFit& f) {
  std::vector<std::string> terms = f.exog_names;
  std::vector<double> est(f.beta.data(), f.beta.data() + f.beta.size());
  std::vector<double> se(f.beta_se.data(), f.beta_se.data() + f.beta_se.size());
  for (std::size_t i = 0; i < f.phi.size(); ++i) {
    terms.push_back(fmt::format("ar.L{}", i + 1));
    est.push_back(f.phi[i]);
    se.push_back(i < f.phi_se.size() ? f.phi_se[i] : NAN);
  }
  for (std::size_t i = 0; i < f.theta.size(); ++i) {
    terms.push_back(fmt::format("ma.L{}", i + 1));
    est.push_back(f.theta[i]);
    se.push_back(i < f.theta_se.size() ? f.theta_se[i] : NAN);
  }
  terms.push_back("sigma2");
  est.push_back(f.sigma2);
  se.push_back(f.sigma2_se);
  return {{"order", {f.order.p, f.order.d, f.order.q}},
          {"terms", terms},
          {"estimate", vec_json(est)},
          {"stderr", vec_json(se)},
          {"loglik", f.loglik},
          {"aic", f.aic},
          {"n_params", f.n_params},
          {"rmse", f.one_step_rmse},
          {"converged", f.converged},
          {"level_normalized", f.level_normalized}};
}

nlohmann::json group_json(const GroupAnalysis& g) {
  const auto& o = g.ols;
  auto ols_terms = ts::exog_names(ts::ExogSelector::capability_only());
  nlohmann::json aic_values = nlohmann::json::array();
  for (const auto& row : g.aic.aic) {
    auto r = nlohmann::json::array();
    for (const auto& v : row) r.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
    aic_values.push_back(r);
  }
  nlohmann::json best = nullptr;
  if (g.aic.best) best = {g.aic.best->p, g.aic.best->d, g.aic.best->q};
  return {
      {"group", design::to_string(g.group)},
      {"n", g.series.size()},
      {"series",
       {{"values", g.series.values},
        {"capability", level_labels(g.series.capability, ts::exog_names({true, false}))},
        {"strategy", level_labels(g.series.strategy, ts::exog_names({false, true}))}}},
      {"ols",
       {{"terms", ols_terms},
        {"estimate", vec_json(o.coefficients)},
        {"stderr", vec_json(o.stderr_)},
        {"t", vec_json(o.t_stat)},
        {"p", vec_json(o.p_value)},
        {"rmse", o.rmse},
        {"r_squared", nullable(o.r_squared)},
        {"loglik", o.loglik},
        {"fitted", vec_json(o.fitted)},
        {"residuals", vec_json(o.residuals)}}},
      {"correlogram",
       {{"acf", g.residual_acf.values}, {"pacf", g.residual_pacf.values}, {"band", g.residual_acf.band}}},
      {"aic",
       {{"d", g.aic.d},
        {"p", g.aic.p_values},
        {"q", g.aic.q_values},
        {"values", aic_values},
        {"errors", g.aic.errors},
        {"best", best}}},
      {"arimax", g.arimax ? arimax_json(*g.arimax) : nlohmann::json(nullptr)},
      {"arimax_error", g.arimax_error},
      {"predictions", {{"offset", g.predictions.offset}, {"values", vec_json(g.predictions.predicted)}}},
  };
}

}  // namespace

AnalysisReport run_analysis(const ts::TrustSeries& g0, const ts::TrustSeries& g1,
                            const AnalysisOptions& options) {
  AnalysisReport report;
  auto second = std::async(std::launch::async, [&] { return analyze_group(g1, options); });
  report.groups[0] = analyze_group(g0, options);
  report.groups[1] = second.get();
  for (int fit = 0; fit < 2; ++fit) {
    const auto& model = report.groups[static_cast<std::size_t>(fit)].arimax;
    if (!model) continue;
    for (int eval = 0; eval < 2; ++eval) {
      try {
        report.arimax_rmse[static_cast<std::size_t>(fit)][static_cast<std::size_t>(eval)] =
            fit == eval ? model->one_step_rmse
                        : ts::cross_validate(*model, report.groups[static_cast<std::size_t>(eval)].series);
      } catch (const std::exception&) {
        // left empty; rendered as a gap
      }
    }
  }
  return report;
}

nlohmann::json report_to_json(const AnalysisReport& report) {
  auto groups = nlohmann::json::array();
  for (const auto& g : report.groups) groups.push_back(group_json(g));
  auto rmse = nlohmann::json::array();
  for (const auto& row : report.arimax_rmse) {
    auto r = nlohmann::json::array();
    for (const auto& v : row) r.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
    rmse.push_back(r);
  }
  return {{"groups", groups}, {"arimax_rmse", rmse}};
}

}  // namespace trustlab::pipeline
