#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "trustlab/design/plan.hpp"
#include "trustlab/design/questionnaire.hpp"
#include "trustlab/sim/world.hpp"

namespace trustlab::server {

enum class SessionStatus { Active, Complete, Abandoned };

std::string_view to_string(SessionStatus s);
SessionStatus session_status_from_string(std::string_view s);

struct SessionRecord {
  std::string session_id;
  std::uint64_t ordinal = 0;  // creation order within the store
  design::Group group = design::Group::G0;
  std::int64_t created_at_ms = 0;
  SessionStatus status = SessionStatus::Active;
  int trial_cursor = 0;
  int cumulative_score = 0;
  bool synthetic = false;
  std::uint64_t experiment_seed = 0;

  friend bool operator==(const SessionRecord&, const SessionRecord&) = default;
};

/// What the server computed when it accepted a trial.
struct TrialResult {
  int trial_index = 0;
  int true_outliers = 0;
  int intersected_by_subject = 0;
  int intersected_by_as = 0;
  int reported_by_as = 0;
  int score_delta = 0;
  int cumulative_score = 0;
  int next_cursor = 0;
  SessionStatus status = SessionStatus::Active;

  friend bool operator==(const TrialResult&, const TrialResult&) = default;
};

struct TrialLog {
  std::string session_id;
  int trial_index = 0;
  sim::Path frames;  // frames[0] is the start state
  design::SurveyResponse survey;
  std::int64_t server_recv_at_ms = 0;
  TrialResult result;

  friend bool operator==(const TrialLog&, const TrialLog&) = default;
};

/// Frames travel as [t, x, y, vx, vy, keys] rows.
nlohmann::json frames_to_json(const sim::Path& frames);
sim::Path frames_from_json(const nlohmann::json& j);

void to_json(nlohmann::json& j, const SessionRecord& s);
void from_json(const nlohmann::json& j, SessionRecord& s);
void to_json(nlohmann::json& j, const TrialResult& r);
void from_json(const nlohmann::json& j, TrialResult& r);
void to_json(nlohmann::json& j, const TrialLog& t);
void from_json(const nlohmann::json& j, TrialLog& t);

/// One session with its accepted trials, as exported.
struct SessionData {
  SessionRecord record;
  std::vector<TrialLog> trials;  // ascending trial_index

  friend bool operator==(const SessionData&, const SessionData&) = default;
};

/// Export lines: {"record":"session",...} followed by that session's
/// {"record":"trial",...} lines.
std::string export_lines(const std::vector<SessionData>& sessions);
/// Inverse of export_lines. Blank lines are skipped; anything else that does
/// not parse throws std::runtime_error naming the line.
std::vector<SessionData> parse_export(std::string_view text);

/// Trial view handed to clients: no capability, only the color.
nlohmann::json client_trial_view(const sim::TrialConfig& trial, const sim::WorldConfig& world);

}  // namespace trustlab::server
