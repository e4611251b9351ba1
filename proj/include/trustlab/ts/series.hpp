#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "trustlab/design/plan.hpp"

namespace trustlab::ts {

/// Per-trial trust values with the trial factors as one-hot columns, in the
/// order C20, C50, C100 and lawnmower, random, omniscient.
struct TrustSeries {
  std::vector<double> values;
  Eigen::MatrixXd capability;  // n x 3
  Eigen::MatrixXd strategy;    // n x 3
  design::Group group = design::Group::G0;

  std::size_t size() const { return values.size(); }
  Eigen::Map<const Eigen::VectorXd> y() const {
    return {values.data(), static_cast<Eigen::Index>(values.size())};
  }

  /// Throws std::invalid_argument on shape mismatch or rows that are not one-hot.
  void validate() const;
};

/// Factor one-hot columns for a sequence of trials with searchers.
TrustSeries series_skeleton(const std::vector<sim::TrialConfig>& trials, design::Group group);

/// Which factor columns enter a regression.
struct ExogSelector {
  bool capability = true;
  bool strategy = false;

  static ExogSelector none() { return {false, false}; }
  static ExogSelector capability_only() { return {true, false}; }
  static ExogSelector both() { return {true, true}; }

  friend bool operator==(const ExogSelector&, const ExogSelector&) = default;
};

Eigen::MatrixXd exog_matrix(const TrustSeries& s, ExogSelector sel);
std::vector<std::string> exog_names(ExogSelector sel);

}  // namespace trustlab::ts
