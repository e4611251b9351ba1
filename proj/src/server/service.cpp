#include "trustlab/server/service.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "trustlab/sim/search.hpp"

namespace trustlab::server {

struct ExperimentService::Session {
  mutable std::mutex m;
  SessionRecord record;
  std::vector<TrialLog> trials;
  sim::Path staged;
  int staged_index = -1;
  std::int64_t last_activity_ms = 0;
};

namespace {

std::string describe(const std::string& id) { return fmt::format("session {}", id); }

void require_active(const SessionRecord& r) {
  if (r.status != SessionStatus::Active) {
    throw ServiceError(ErrorKind::Inactive,
                       fmt::format("{} is {}", describe(r.session_id), to_string(r.status)));
  }
}

void require_cursor(const SessionRecord& r, int trial_index) {
  if (trial_index != r.trial_cursor) {
    throw ServiceError(ErrorKind::OutOfOrder,
                       fmt::format("{}: trial {} requested, cursor is at {}",
                                   describe(r.session_id), trial_index, r.trial_cursor));
  }
}

}  // namespace

ExperimentService::ExperimentService(ServiceConfig config)
    : config_(std::move(config)), store_(config_.data_dir, config_.fsync) {
  config_.world.validate();
  load();
}

ExperimentService::~ExperimentService() = default;

std::int64_t ExperimentService::now_ms() const {
  if (config_.clock) return config_.clock();
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

void ExperimentService::fault(std::string_view point) const {
  if (config_.fault_hook) config_.fault_hook(point);
}

std::string ExperimentService::new_session_id() const {
  std::random_device rd;
  std::string id;
  do {
    id.clear();
    for (int i = 0; i < 4; ++i) id += fmt::format("{:08x}", static_cast<std::uint32_t>(rd()));
  } while (sessions_.count(id) != 0);
  return id;
}

const design::ExperimentPlan& ExperimentService::plan_for(const SessionRecord& r) const {
  std::lock_guard lock(plans_mutex_);
  auto& slot = plans_[{r.experiment_seed, r.group}];
  if (!slot) {
    slot = std::make_unique<design::ExperimentPlan>(
        design::build_plan(r.experiment_seed, r.group, config_.world));
  }
  return *slot;
}

const design::ExperimentPlan& ExperimentService::plan(design::Group group) const {
  SessionRecord r;
  r.experiment_seed = config_.experiment_seed;
  r.group = group;
  return plan_for(r);
}

void ExperimentService::load() {
  std::map<std::string, std::vector<SessionStatus>> status_events;
  for (const auto& ev : store_.read_index()) {
    const auto kind = ev.at("event").get<std::string>();
    if (kind == "create") {
      auto s = std::make_unique<Session>();
      s->record = ev.at("session").get<SessionRecord>();
      s->last_activity_ms = s->record.created_at_ms;
      next_ordinal_ = std::max(next_ordinal_, s->record.ordinal + 1);
      const std::string id = s->record.session_id;
      sessions_.emplace(id, std::move(s));
    } else if (kind == "status") {
      status_events[ev.at("session_id").get<std::string>()].push_back(
          session_status_from_string(ev.at("status").get<std::string>()));
    }
  }
  for (auto& [id, s] : sessions_) {
    for (const auto& ev : store_.read_session(id)) {
      const auto kind = ev.at("event").get<std::string>();
      const int index = ev.at("trial_index").get<int>();
      if (index != s->record.trial_cursor) continue;  // duplicate or stale
      if (kind == "frames") {
        if (s->staged_index != index) s->staged.clear();
        s->staged_index = index;
        const auto batch = frames_from_json(ev.at("frames"));
        s->staged.insert(s->staged.end(), batch.begin(), batch.end());
      } else if (kind == "trial") {
        TrialLog log = ev.at("log").get<TrialLog>();
        s->record.trial_cursor = log.result.next_cursor;
        s->record.cumulative_score = log.result.cumulative_score;
        s->record.status = log.result.status;
        s->last_activity_ms = log.server_recv_at_ms;
        s->trials.push_back(std::move(log));
        s->staged.clear();
        s->staged_index = -1;
      }
    }
    for (SessionStatus st : status_events[id]) {
      if (s->record.status == SessionStatus::Active) s->record.status = st;
    }
  }
}

ExperimentService::Session& ExperimentService::find(const std::string& session_id) const {
  std::shared_lock lock(sessions_mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) {
    throw ServiceError(ErrorKind::NotFound, fmt::format("unknown session '{}'", session_id));
  }
  return *it->second;
}

SessionRecord ExperimentService::create_session(bool synthetic) {
  std::unique_lock lock(sessions_mutex_);
  auto s = std::make_unique<Session>();
  s->record.session_id = new_session_id();
  s->record.ordinal = next_ordinal_;
  s->record.group = design::assign_group(next_ordinal_);
  s->record.created_at_ms = now_ms();
  s->record.synthetic = synthetic;
  s->record.experiment_seed = config_.experiment_seed;
  s->last_activity_ms = s->record.created_at_ms;
  {
    std::lock_guard index_lock(index_mutex_);
    store_.append_index({{"event", "create"}, {"session", s->record}});
  }
  ++next_ordinal_;
  SessionRecord out = s->record;
  sessions_.emplace(out.session_id, std::move(s));
  lock.unlock();
  plan_for(out);
  return out;
}

SessionRecord ExperimentService::session(const std::string& session_id) const {
  Session& s = find(session_id);
  std::lock_guard lock(s.m);
  return s.record;
}

std::vector<SessionRecord> ExperimentService::sessions() const {
  std::vector<SessionRecord> out;
  {
    std::shared_lock lock(sessions_mutex_);
    for (const auto& [id, s] : sessions_) {
      std::lock_guard slock(s->m);
      out.push_back(s->record);
    }
  }
  std::sort(out.begin(), out.end(),
            [](const SessionRecord& a, const SessionRecord& b) { return a.ordinal < b.ordinal; });
  return out;
}

nlohmann::json ExperimentService::get_trial(const std::string& session_id, int trial_index) const {
  Session& s = find(session_id);
  std::lock_guard lock(s.m);
  require_active(s.record);
  require_cursor(s.record, trial_index);
  nlohmann::json j = client_trial_view(plan_for(s.record).trial(trial_index), config_.world);
  j["session_id"] = s.record.session_id;
  j["cumulative_score"] = s.record.cumulative_score;
  return j;
}

ReportView ExperimentService::get_report(const std::string& session_id, int trial_index) const {
  Session& s = find(session_id);
  std::lock_guard lock(s.m);
  if (trial_index < 0 || trial_index > s.record.trial_cursor) require_cursor(s.record, trial_index);
  if (trial_index == s.record.trial_cursor) require_active(s.record);
  const sim::TrialConfig& trial = plan_for(s.record).trial(trial_index);
  ReportView v;
  v.trial_index = trial_index;
  if (!trial.solo()) {
    v.reported_by_as = sim::run_searcher(trial, config_.world).reported_by_as;
    v.line = design::questionnaire().report_line(trial.searcher->color(), v.reported_by_as);
  }
  return v;
}

void ExperimentService::validate_frames(const sim::Path& frames) const {
  const sim::WorldConfig& w = config_.world;
  auto reject = [](const std::string& msg) { throw ServiceError(ErrorKind::Invalid, msg); };
  if (frames.empty()) reject("no frames");
  const auto limit = static_cast<std::size_t>(
      std::floor(w.tick_rate * w.trial_duration * (1.0 + config_.frame_slack) + 1e-9));
  if (frames.size() - 1 > limit) {
    reject(fmt::format("{} steps exceed the limit of {}", frames.size() - 1, limit));
  }
  const sim::FrameState& f0 = frames.front();
  if (!(f0.pos == w.start_position()) || !(f0.vel == sim::Vec2{}) ||
      std::abs(f0.t) > config_.jitter_s) {
    reject("first frame is not the start state");
  }
  const double dt = w.dt();
  for (std::size_t k = 1; k < frames.size(); ++k) {
    const double step = frames[k].t - frames[k - 1].t;
    if (std::abs(step - dt) > config_.jitter_s) {
      reject(fmt::format("frame {}: timestamp step {} s outside {} +/- {}", k, step, dt,
                         config_.jitter_s));
    }
    const sim::FrameState expect = sim::step_spotlight(frames[k - 1], frames[k].keys, w);
    if (!(expect.pos == frames[k].pos) || !(expect.vel == frames[k].vel)) {
      reject(fmt::format("frame {} does not replay from frame {}", k, k - 1));
    }
  }
}

std::size_t ExperimentService::upload_frames(const std::string& session_id, int trial_index,
                                             const sim::Path& frames) {
  Session& s = find(session_id);
  std::lock_guard lock(s.m);
  require_active(s.record);
  require_cursor(s.record, trial_index);
  if (frames.empty()) throw ServiceError(ErrorKind::Invalid, "empty frame batch");
  if (s.staged_index != trial_index) {
    s.staged.clear();
    s.staged_index = trial_index;
  }
  const auto max_batch =
      static_cast<std::size_t>(std::ceil(config_.max_batch_s * config_.world.tick_rate)) +
      (s.staged.empty() ? 1 : 0);
  if (frames.size() > max_batch) {
    throw ServiceError(ErrorKind::Invalid,
                       fmt::format("batch of {} frames exceeds {}", frames.size(), max_batch));
  }
  if (!s.staged.empty() && !(frames.front().t > s.staged.back().t)) {
    throw ServiceError(ErrorKind::Invalid, "batch does not continue the staged frames");
  }
  store_.append_session(session_id, {{"event", "frames"},
                                     {"trial_index", trial_index},
                                     {"frames", frames_to_json(frames)}});
  s.staged.insert(s.staged.end(), frames.begin(), frames.end());
  s.last_activity_ms = now_ms();
  return s.staged.size();
}

SubmitResponse ExperimentService::submit_trial(const std::string& session_id, int trial_index,
                                               const std::optional<sim::Path>& frames,
                                               const design::SurveyResponse& survey) {
  Session& s = find(session_id);
  std::lock_guard lock(s.m);
  const design::ExperimentPlan& plan = plan_for(s.record);
  auto line_for = [&](const TrialResult& r) {
    const sim::TrialConfig& t = plan.trial(r.trial_index);
    return t.solo() ? std::string{}
                    : design::questionnaire().report_line(t.searcher->color(), r.reported_by_as);
  };

  if (trial_index >= 0 && trial_index < s.record.trial_cursor) {
    const TrialLog& stored = s.trials[static_cast<std::size_t>(trial_index)];
    if (stored.survey == survey && (!frames || *frames == stored.frames)) {
      return {stored.result, line_for(stored.result)};
    }
    throw ServiceError(ErrorKind::Conflict,
                       fmt::format("trial {} was already accepted with different content", trial_index));
  }
  require_active(s.record);
  require_cursor(s.record, trial_index);
  if (survey.trial_index != trial_index) {
    throw ServiceError(ErrorKind::Invalid, "survey trial_index does not match the trial");
  }
  try {
    survey.validate();
  } catch (const std::invalid_argument& e) {
    throw ServiceError(ErrorKind::Invalid, e.what());
  }
  const sim::TrialConfig& trial = plan.trial(trial_index);
  if (!trial.solo() && !survey.likert) {
    throw ServiceError(ErrorKind::Invalid, "ratings are required after trials with a searcher");
  }
  const sim::Path& path =
      frames ? *frames : (s.staged_index == trial_index ? s.staged : sim::Path{});
  validate_frames(path);

  TrialResult r;
  r.trial_index = trial_index;
  r.true_outliers = static_cast<int>(trial.outlier_cells.size());
  r.intersected_by_subject = sim::count_intersections(path, trial.outlier_cells, config_.world);
  if (!trial.solo()) {
    const sim::SearchOutcome as = sim::run_searcher(trial, config_.world);
    r.intersected_by_as = as.intersected_by_as;
    r.reported_by_as = as.reported_by_as;
  }
  r.score_delta = sim::trial_score(survey.total_estimate, r.true_outliers);
  r.cumulative_score = s.record.cumulative_score + r.score_delta;
  r.next_cursor = trial_index + 1;
  r.status = r.next_cursor == design::kTotalTrials ? SessionStatus::Complete : SessionStatus::Active;

  TrialLog log;
  log.session_id = session_id;
  log.trial_index = trial_index;
  log.frames = path;
  log.survey = survey;
  log.server_recv_at_ms = now_ms();
  log.result = r;

  fault("before_persist");
  store_.append_session(session_id, {{"event", "trial"}, {"trial_index", trial_index}, {"log", log}});
  fault("after_persist");

  s.trials.push_back(std::move(log));
  s.record.trial_cursor = r.next_cursor;
  s.record.cumulative_score = r.cumulative_score;
  s.record.status = r.status;
  s.staged.clear();
  s.staged_index = -1;
  s.last_activity_ms = s.trials.back().server_recv_at_ms;
  return {r, line_for(r)};
}

SessionRecord ExperimentService::abandon(const std::string& session_id) {
  Session& s = find(session_id);
  std::lock_guard lock(s.m);
  require_active(s.record);
  {
    std::lock_guard index_lock(index_mutex_);
    store_.append_index({{"event", "status"},
                         {"session_id", session_id},
                         {"status", to_string(SessionStatus::Abandoned)},
                         {"at_ms", now_ms()}});
  }
  s.record.status = SessionStatus::Abandoned;
  return s.record;
}

std::vector<std::string> ExperimentService::abandon_idle(std::int64_t max_idle_ms) {
  const std::int64_t now = now_ms();
  std::vector<std::string> idle;
  {
    std::shared_lock lock(sessions_mutex_);
    for (const auto& [id, s] : sessions_) {
      std::lock_guard slock(s->m);
      if (s->record.status == SessionStatus::Active && now - s->last_activity_ms > max_idle_ms) {
        idle.push_back(id);
      }
    }
  }
  std::vector<std::string> done;
  for (const auto& id : idle) {
    try {
      abandon(id);
      done.push_back(id);
    } catch (const ServiceError&) {
      // finished or abandoned concurrently
    }
  }
  return done;
}

std::vector<SessionData> ExperimentService::export_sessions(const ExportFilter& filter) const {
  std::vector<SessionData> out;
  {
    std::shared_lock lock(sessions_mutex_);
    for (const auto& [id, s] : sessions_) {
      std::lock_guard slock(s->m);
      const SessionRecord& r = s->record;
      if (filter.group && r.group != *filter.group) continue;
      if (filter.status && r.status != *filter.status) continue;
      if (filter.synthetic && r.synthetic != *filter.synthetic) continue;
      SessionData d{r, s->trials};
      if (!filter.include_frames) {
        for (auto& t : d.trials) t.frames.clear();
      }
      out.push_back(std::move(d));
    }
  }
  std::sort(out.begin(), out.end(), [](const SessionData& a, const SessionData& b) {
    return a.record.ordinal < b.record.ordinal;
  });
  return out;
}

}  // namespace trustlab::server
