#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trustlab/server/records.hpp"

namespace trustlab::pipeline {

enum class ExclusionReason { Incomplete, OutOfProtocolBreak, UnreasonableAnswers };

std::string_view to_string(ExclusionReason r);

struct ExclusionThresholds {
  std::int64_t max_gap_ms = 10 * 60 * 1000;  // longest allowed pause between trials
  int max_total_estimate = 49;               // one more than the 7 x 7 grid
  int min_unreasonable_trials = 3;
};

struct ExclusionReport {
  std::string session_id;
  ExclusionReason reason = ExclusionReason::Incomplete;
  std::string evidence;
};

struct ExclusionResult {
  std::vector<server::SessionData> kept;
  std::vector<ExclusionReport> excluded;
};

/// Verdict for a single session; each session is judged on its own records.
/// Reasons are checked in the order Incomplete, OutOfProtocolBreak,
/// UnreasonableAnswers and the first that applies is reported.
std::optional<ExclusionReport> judge(const server::SessionData& session,
                                     const ExclusionThresholds& thresholds = {});

ExclusionResult exclude(const std::vector<server::SessionData>& sessions,
                        const ExclusionThresholds& thresholds = {});

}  // namespace trustlab::pipeline
