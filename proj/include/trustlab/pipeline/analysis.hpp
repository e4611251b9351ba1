#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trustlab/ts/arimax.hpp"
#include "trustlab/ts/correlogram.hpp"
#include "trustlab/ts/ols.hpp"
#include "trustlab/ts/series.hpp"

namespace trustlab::pipeline {

struct AnalysisOptions {
  std::vector<int> p_values = ts::int_range(0, 4);
  std::vector<int> q_values = ts::int_range(0, 4);
  int d = 1;
  int max_lag = 20;
  ts::FitOptions fit;
};

struct GroupAnalysis {
  design::Group group = design::Group::G0;
  ts::TrustSeries series;
  ts::OlsFit ols;  // capability dummies, no intercept
  ts::Correlogram residual_acf;
  ts::Correlogram residual_pacf;
  ts::AicTable aic;
  std::optional<ts::ArimaxFit> arimax;  // at the AIC-best order
  std::string arimax_error;             // why `arimax` is empty
  ts::OneStepForecast predictions;
};

struct AnalysisReport {
  std::array<GroupAnalysis, 2> groups;
  // arimax_rmse[fit][eval]: the model fitted on one group's series applied to
  // another's. Diagonal entries are the fits' own one-step RMSE.
  std::array<std::array<std::optional<double>, 2>, 2> arimax_rmse;
};

/// OLS, residual correlograms, AIC grid, best ARIMAX and the cross-group
/// RMSE matrix. Fit failures leave annotated gaps instead of throwing.
AnalysisReport run_analysis(const ts::TrustSeries& g0, const ts::TrustSeries& g1,
                            const AnalysisOptions& options = {});

nlohmann::json report_to_json(const AnalysisReport& report);

}  // namespace trustlab::pipeline
