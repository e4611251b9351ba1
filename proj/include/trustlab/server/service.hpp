#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trustlab/design/plan.hpp"
#include "trustlab/server/records.hpp"
#include "trustlab/server/store.hpp"

namespace trustlab::server {

enum class ErrorKind { NotFound, OutOfOrder, Invalid, Conflict, Inactive };

class ServiceError : public std::runtime_error {
 public:
  ServiceError(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

struct ServiceConfig {
  std::filesystem::path data_dir = "data";
  std::uint64_t experiment_seed = 1;
  sim::WorldConfig world;
  double frame_slack = 0.05;   // accepted overrun of tick_rate * trial_duration
  double jitter_s = 0.002;     // tolerance on each 1/tick_rate timestamp step
  double max_batch_s = 2.0;    // longest frame upload batch
  bool fsync = true;
  std::function<std::int64_t()> clock;                  // ms since epoch; system clock if empty
  std::function<void(std::string_view point)> fault_hook;  // test hook, may throw
};

struct ReportView {
  int trial_index = 0;
  int reported_by_as = 0;
  std::string line;  // empty on practice trials
};

struct SubmitResponse {
  TrialResult result;
  std::string report_line;
};

struct ExportFilter {
  std::optional<design::Group> group;
  std::optional<SessionStatus> status;
  std::optional<bool> synthetic;
  bool include_frames = true;
};

/// Session lifecycle, trial delivery and durable logging. Operations on one
/// session are serialized; different sessions proceed independently.
class ExperimentService {
 public:
  explicit ExperimentService(ServiceConfig config);
  ~ExperimentService();

  ExperimentService(const ExperimentService&) = delete;
  ExperimentService& operator=(const ExperimentService&) = delete;

  SessionRecord create_session(bool synthetic = false);
  SessionRecord session(const std::string& session_id) const;
  std::vector<SessionRecord> sessions() const;

  /// Client view of the trial at the session's cursor.
  nlohmann::json get_trial(const std::string& session_id, int trial_index) const;
  ReportView get_report(const std::string& session_id, int trial_index) const;

  /// Stages one batch of frames for the cursor trial. Batches must continue
  /// where the previous one ended. Returns the number of frames staged.
  std::size_t upload_frames(const std::string& session_id, int trial_index,
                            const sim::Path& frames);

  /// Validates and persists a trial. Frames come from `frames` when given,
  /// otherwise from the staged batches. Resubmitting an accepted trial with
  /// the same content returns the original response.
  SubmitResponse submit_trial(const std::string& session_id, int trial_index,
                              const std::optional<sim::Path>& frames,
                              const design::SurveyResponse& survey);

  SessionRecord abandon(const std::string& session_id);
  /// Abandons active sessions idle for longer than `max_idle_ms`.
  std::vector<std::string> abandon_idle(std::int64_t max_idle_ms);

  std::vector<SessionData> export_sessions(const ExportFilter& filter = {}) const;

  const design::ExperimentPlan& plan(design::Group group) const;
  const ServiceConfig& config() const { return config_; }

  /// Throws ServiceError(Invalid) unless frames form a legal trace from the start state.
  void validate_frames(const sim::Path& frames) const;

 private:
  struct Session;

  std::int64_t now_ms() const;
  void fault(std::string_view point) const;
  Session& find(const std::string& session_id) const;
  const design::ExperimentPlan& plan_for(const SessionRecord& r) const;
  void load();
  std::string new_session_id() const;

  ServiceConfig config_;
  SessionStore store_;
  mutable std::mutex plans_mutex_;
  mutable std::map<std::pair<std::uint64_t, design::Group>, std::unique_ptr<design::ExperimentPlan>> plans_;
  mutable std::shared_mutex sessions_mutex_;
  std::mutex index_mutex_;
  std::map<std::string, std::unique_ptr<Session>> sessions_;
  std::uint64_t next_ordinal_ = 0;
};

}  // namespace trustlab::server
