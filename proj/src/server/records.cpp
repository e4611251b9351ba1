#include "trustlab/server/records.hpp"

#include <stdexcept>

#include <fmt/format.h>

namespace trustlab::server {

std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::Active: return "active";
    case SessionStatus::Complete: return "complete";
    case SessionStatus::Abandoned: return "abandoned";
  }
  return "?";
}

SessionStatus session_status_from_string(std::string_view s) {
  for (auto v : {SessionStatus::Active, SessionStatus::Complete, SessionStatus::Abandoned}) {
    if (to_string(v) == s) return v;
  }
  throw std::invalid_argument(fmt::format("unknown session status: {}", s));
}

nlohmann::json frames_to_json(const sim::Path& frames) {
  auto out = nlohmann::json::array();
  for (const auto& f : frames) {
    out.push_back({f.t, f.pos.x, f.pos.y, f.vel.x, f.vel.y, f.keys});
  }
  return out;
}

sim::Path frames_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("frames must be an array");
  sim::Path out;
  out.reserve(j.size());
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != 6) {
      throw std::invalid_argument("frame rows must be [t, x, y, vx, vy, keys]");
    }
    sim::FrameState f;
    f.t = row[0].get<double>();
    f.pos = {row[1].get<double>(), row[2].get<double>()};
    f.vel = {row[3].get<double>(), row[4].get<double>()};
    const int keys = row[5].get<int>();
    if (keys < 0 || keys > 15) throw std::invalid_argument("frame key mask outside 0..15");
    f.keys = static_cast<sim::KeyMask>(keys);
    out.push_back(f);
  }
  return out;
}

void to_json(nlohmann::json& j, const SessionRecord& s) {
  j = {{"session_id", s.session_id},
       {"ordinal", s.ordinal},
       {"group", design::to_string(s.group)},
       {"created_at_ms", s.created_at_ms},
       {"status", to_string(s.status)},
       {"trial_cursor", s.trial_cursor},
       {"cumulative_score", s.cumulative_score},
       {"synthetic", s.synthetic},
       {"experiment_seed", s.experiment_seed}};
}

void from_json(const nlohmann::json& j, SessionRecord& s) {
  s.session_id = j.at("session_id").get<std::string>();
  s.ordinal = j.at("ordinal").get<std::uint64_t>();
  s.group = design::group_from_string(j.at("group").get<std::string>());
  s.created_at_ms = j.at("created_at_ms").get<std::int64_t>();
  s.status = session_status_from_string(j.at("status").get<std::string>());
  s.trial_cursor = j.at("trial_cursor").get<int>();
  s.cumulative_score = j.at("cumulative_score").get<int>();
  s.synthetic = j.value("synthetic", false);
  s.experiment_seed = j.at("experiment_seed").get<std::uint64_t>();
}

void to_json(nlohmann::json& j, const TrialResult& r) {
  j = {{"trial_index", r.trial_index},
       {"true_outliers", r.true_outliers},
       {"intersected_by_subject", r.intersected_by_subject},
       {"intersected_by_as", r.intersected_by_as},
       {"reported_by_as", r.reported_by_as},
       {"score_delta", r.score_delta},
       {"cumulative_score", r.cumulative_score},
       {"next_cursor", r.next_cursor},
       {"status", to_string(r.status)}};
}

void from_json(const nlohmann::json& j, TrialResult& r) {
  r.trial_index = j.at("trial_index").get<int>();
  r.true_outliers = j.at("true_outliers").get<int>();
  r.intersected_by_subject = j.at("intersected_by_subject").get<int>();
  r.intersected_by_as = j.at("intersected_by_as").get<int>();
  r.reported_by_as = j.at("reported_by_as").get<int>();
  r.score_delta = j.at("score_delta").get<int>();
  r.cumulative_score = j.at("cumulative_score").get<int>();
  r.next_cursor = j.at("next_cursor").get<int>();
  r.status = session_status_from_string(j.at("status").get<std::string>());
}

void to_json(nlohmann::json& j, const TrialLog& t) {
  j = {{"session_id", t.session_id},
       {"trial_index", t.trial_index},
       {"frames", frames_to_json(t.frames)},
       {"survey", t.survey},
       {"server_recv_at_ms", t.server_recv_at_ms},
       {"result", t.result}};
}

void from_json(const nlohmann::json& j, TrialLog& t) {
  t.session_id = j.at("session_id").get<std::string>();
  t.trial_index = j.at("trial_index").get<int>();
  t.frames = frames_from_json(j.at("frames"));
  t.survey = j.at("survey").get<design::SurveyResponse>();
  t.server_recv_at_ms = j.at("server_recv_at_ms").get<std::int64_t>();
  t.result = j.at("result").get<TrialResult>();
}

std::string export_lines(const std::vector<SessionData>& sessions) {
  std::string out;
  for (const auto& s : sessions) {
    nlohmann::json head = s.record;
    head["record"] = "session";
    out += head.dump();
    out += '\n';
    for (const auto& t : s.trials) {
      nlohmann::json line = t;
      line["record"] = "trial";
      out += line.dump();
      out += '\n';
    }
  }
  return out;
}

std::vector<SessionData> parse_export(std::string_view text) {
  std::vector<SessionData> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto kind = j.at("record").get<std::string>();
      if (kind == "session") {
        out.push_back({j.get<SessionRecord>(), {}});
      } else if (kind == "trial") {
        auto t = j.get<TrialLog>();
        if (out.empty() || out.back().record.session_id != t.session_id) {
          throw std::runtime_error("trial record outside its session");
        }
        out.back().trials.push_back(std::move(t));
      } else {
        throw std::runtime_error("unknown record kind '" + kind + "'");
      }
    } catch (const std::exception& e) {
      throw std::runtime_error(fmt::format("export line {}: {}", line_no, e.what()));
    }
  }
  return out;
}

nlohmann::json client_trial_view(const sim::TrialConfig& trial, const sim::WorldConfig& world) {
  nlohmann::json j = {{"trial_index", trial.trial_index},
                      {"rng_seed", trial.rng_seed},
                      {"practice", trial.solo()},
                      {"outlier_cells", trial.outlier_cells},
                      {"world", world}};
  if (trial.searcher) {
    j["searcher"] = {{"strategy", sim::to_string(trial.searcher->strategy)},
                     {"color", sim::to_string(trial.searcher->color())}};
  } else {
    j["searcher"] = nullptr;
  }
  j["questionnaire"] = design::questionnaire_json();
  return j;
}

}  // namespace trustlab::server
