#include "trustlab/pipeline/series.hpp"

#include <optional>
#include <stdexcept>

#include <fmt/format.h>

#include "trustlab/design/plan.hpp"

namespace trustlab::pipeline {

ts::TrustSeries build_series(const std::vector<server::SessionData>& sessions,
                             design::Group group) {
  std::optional<std::uint64_t> seed;
  std::vector<double> sum(design::kMainTrials, 0.0);
  int count = 0;
  for (const auto& s : sessions) {
    if (s.record.group != group) continue;
    if (seed && *seed != s.record.experiment_seed) {
      throw std::invalid_argument("build_series: sessions come from different experiment seeds");
    }
    seed = s.record.experiment_seed;
    if (s.trials.size() != static_cast<std::size_t>(design::kTotalTrials)) {
      throw std::invalid_argument(
          fmt::format("build_series: session {} has {} trials", s.record.session_id, s.trials.size()));
    }
    for (int k = 0; k < design::kMainTrials; ++k) {
      const auto& t = s.trials[static_cast<std::size_t>(design::kPracticeTrials + k)];
      if (!t.survey.likert) {
        throw std::invalid_argument(fmt::format("build_series: session {} trial {} has no ratings",
                                                s.record.session_id, t.trial_index));
      }
      sum[static_cast<std::size_t>(k)] += design::normalize_trust((*t.survey.likert)[design::kTrustStatement]);
    }
    ++count;
  }
  if (count == 0) {
    throw std::invalid_argument(fmt::format("build_series: no sessions in group {}", design::to_string(group)));
  }
  const design::ExperimentPlan plan = design::build_plan(*seed, group);
  ts::TrustSeries out = ts::series_skeleton(plan.main_trials(), group);
  out.values.resize(sum.size());
  for (std::size_t k = 0; k < sum.size(); ++k) out.values[k] = sum[k] / count;
  return out;
}

}  // namespace trustlab::pipeline
