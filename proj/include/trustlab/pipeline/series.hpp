#pragma once

#include <vector>

#include "trustlab/server/records.hpp"
#include "trustlab/ts/series.hpp"

namespace trustlab::pipeline {

/// Group-mean trust over the 63 main trials: the mean of the normalized
/// trust-statement rating across the group's sessions, with factor columns
/// from the shared plan. Throws std::invalid_argument when the group has no
/// sessions, sessions disagree on the experiment seed, or a rating is missing.
ts::TrustSeries build_series(const std::vector<server::SessionData>& sessions,
                             design::Group group);

}  // namespace trustlab::pipeline
