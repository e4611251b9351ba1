#include "trustlab/ts/series.hpp"

#include <cmath>
#include <stdexcept>

namespace trustlab::ts {
namespace {

void check_one_hot(const Eigen::MatrixXd& m, std::size_t n, const char* what) {
  if (static_cast<std::size_t>(m.rows()) != n || m.cols() != 3) {
    throw std::invalid_argument(std::string("TrustSeries: ") + what + " must be n x 3");
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (std::abs(m.row(i).sum() - 1.0) > 1e-12 || (m.row(i).array() * (1.0 - m.row(i).array())).abs().maxCoeff() > 1e-12) {
      throw std::invalid_argument(std::string("TrustSeries: ") + what + " row " +
                                  std::to_string(i) + " is not one-hot");
    }
  }
}

}  // namespace

void TrustSeries::validate() const {
  check_one_hot(capability, values.size(), "capability");
  check_one_hot(strategy, values.size(), "strategy");
}

TrustSeries series_skeleton(const std::vector<sim::TrialConfig>& trials, design::Group group) {
  TrustSeries s;
  s.group = group;
  const auto n = static_cast<Eigen::Index>(trials.size());
  s.values.assign(trials.size(), 0.0);
  s.capability = Eigen::MatrixXd::Zero(n, 3);
  s.strategy = Eigen::MatrixXd::Zero(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& t = trials[static_cast<std::size_t>(i)];
    if (!t.searcher) throw std::invalid_argument("series_skeleton: solo trial has no factors");
    s.capability(i, static_cast<Eigen::Index>(t.searcher->capability)) = 1.0;
    s.strategy(i, static_cast<Eigen::Index>(t.searcher->strategy)) = 1.0;
  }
  return s;
}

Eigen::MatrixXd exog_matrix(const TrustSeries& s, ExogSelector sel) {
  const auto n = static_cast<Eigen::Index>(s.size());
  Eigen::MatrixXd x(n, (sel.capability ? 3 : 0) + (sel.strategy ? 3 : 0));
  Eigen::Index col = 0;
  if (sel.capability) {
    x.middleCols(col, 3) = s.capability;
    col += 3;
  }
  if (sel.strategy) x.middleCols(col, 3) = s.strategy;
  return x;
}

std::vector<std::string> exog_names(ExogSelector sel) {
  std::vector<std::string> names;
  if (sel.capability) names.insert(names.end(), {"capability_20", "capability_50", "capability_100"});
  if (sel.strategy) names.insert(names.end(), {"strategy_lawnmower", "strategy_random", "strategy_omniscient"});
  return names;
}

}  // namespace trustlab::ts
