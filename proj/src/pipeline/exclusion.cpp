#include "trustlab/pipeline/exclusion.hpp"

#include <optional>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "trustlab/design/plan.hpp"

namespace trustlab::pipeline {

std::string_view to_string(ExclusionReason r) {
  switch (r) {
    case ExclusionReason::Incomplete: return "incomplete";
    case ExclusionReason::OutOfProtocolBreak: return "out_of_protocol_break";
    case ExclusionReason::UnreasonableAnswers: return "unreasonable_answers";
  }
  return "?";
}

std::optional<ExclusionReport> judge(const server::SessionData& session,
                                     const ExclusionThresholds& th) {
  const auto& rec = session.record;
  if (rec.status != server::SessionStatus::Complete ||
      session.trials.size() != static_cast<std::size_t>(design::kTotalTrials)) {
    return ExclusionReport{rec.session_id, ExclusionReason::Incomplete,
                           fmt::format("status {}, {} of {} trials", server::to_string(rec.status),
                                       session.trials.size(), design::kTotalTrials)};
  }
  for (std::size_t k = 1; k < session.trials.size(); ++k) {
    const std::int64_t gap =
        session.trials[k].server_recv_at_ms - session.trials[k - 1].server_recv_at_ms;
    if (gap > th.max_gap_ms) {
      return ExclusionReport{rec.session_id, ExclusionReason::OutOfProtocolBreak,
                             fmt::format("{} ms between trials {} and {} (limit {} ms)", gap,
                                         session.trials[k - 1].trial_index,
                                         session.trials[k].trial_index, th.max_gap_ms)};
    }
  }
  std::vector<int> bad;
  for (const auto& t : session.trials) {
    if (t.survey.total_estimate > th.max_total_estimate ||
        t.survey.found_count > t.result.true_outliers) {
      bad.push_back(t.trial_index);
    }
  }
  if (static_cast<int>(bad.size()) >= th.min_unreasonable_trials) {
    return ExclusionReport{
        rec.session_id, ExclusionReason::UnreasonableAnswers,
        fmt::format("{} trials with total > {} or found > outliers (limit {}): {}", bad.size(),
                    th.max_total_estimate, th.min_unreasonable_trials, fmt::join(bad, " "))};
  }
  return std::nullopt;
}

ExclusionResult exclude(const std::vector<server::SessionData>& sessions,
                        const ExclusionThresholds& th) {
  ExclusionResult out;
  for (const auto& s : sessions) {
    if (auto verdict = judge(s, th)) {
      out.excluded.push_back(std::move(*verdict));
    } else {
      out.kept.push_back(s);
    }
  }
  return out;
}

}  // namespace trustlab::pipeline
