#include "trustlab/server/http.hpp"

#include <cstdlib>
#include <fstream>

#include <fmt/format.h>
#include <httplib.h>

namespace trustlab::server {
namespace {

int http_status(ErrorKind k) {
  switch (k) {
    case ErrorKind::NotFound: return 404;
    case ErrorKind::OutOfOrder: return 409;
    case ErrorKind::Conflict: return 409;
    case ErrorKind::Inactive: return 410;
    case ErrorKind::Invalid: return 400;
  }
  return 500;
}

std::string_view error_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::NotFound: return "not_found";
    case ErrorKind::OutOfOrder: return "out_of_order";
    case ErrorKind::Conflict: return "conflict";
    case ErrorKind::Inactive: return "inactive";
    case ErrorKind::Invalid: return "invalid";
  }
  return "error";
}

void reply(httplib::Response& res, const nlohmann::json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, std::string_view kind, std::string_view msg) {
  reply(res, {{"error", kind}, {"message", msg}}, status);
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

Handler guarded(Handler h) {
  return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
    try {
      h(req, res);
    } catch (const ServiceError& e) {
      reply_error(res, http_status(e.kind()), error_name(e.kind()), e.what());
    } catch (const nlohmann::json::exception& e) {
      reply_error(res, 400, "invalid", e.what());
    } catch (const std::invalid_argument& e) {
      reply_error(res, 400, "invalid", e.what());
    } catch (const std::out_of_range& e) {
      reply_error(res, 404, "not_found", e.what());
    } catch (const std::exception& e) {
      reply_error(res, 500, "internal", e.what());
    }
  };
}

nlohmann::json score_json(const SessionRecord& r) {
  return {{"session_id", r.session_id},
          {"cumulative_score", r.cumulative_score},
          {"trial_cursor", r.trial_cursor},
          {"status", to_string(r.status)}};
}

int trial_param(const httplib::Request& req) { return std::stoi(req.matches[2].str()); }

}  // namespace

ServerConfig load_server_config(const std::optional<std::filesystem::path>& file,
                                const EnvLookup& env) {
  ServerConfig c;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw std::runtime_error("cannot read config " + file->string());
    const auto j = nlohmann::json::parse(in);
    c.host = j.value("host", c.host);
    c.port = j.value("port", c.port);
    c.idle_timeout_ms = j.value("idle_timeout_ms", c.idle_timeout_ms);
    c.service.data_dir = j.value("data_dir", c.service.data_dir.string());
    c.service.experiment_seed = j.value("experiment_seed", c.service.experiment_seed);
    c.service.frame_slack = j.value("frame_slack", c.service.frame_slack);
    c.service.jitter_s = j.value("jitter_s", c.service.jitter_s);
    c.service.fsync = j.value("fsync", c.service.fsync);
    if (j.contains("world")) c.service.world = j.at("world").get<sim::WorldConfig>();
  }
  const EnvLookup lookup = env ? env : [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    return v ? std::optional<std::string>(v) : std::nullopt;
  };
  if (auto v = lookup("TRUSTLAB_PORT")) c.port = std::stoi(*v);
  if (auto v = lookup("TRUSTLAB_DATA_DIR")) c.service.data_dir = *v;
  if (auto v = lookup("TRUSTLAB_SEED")) c.service.experiment_seed = std::stoull(*v);
  if (c.port < 0 || c.port > 65535) throw std::invalid_argument("port outside 0..65535");
  return c;
}

HttpServer::HttpServer(ExperimentService& service)
    : service_(service), http_(std::make_unique<httplib::Server>()) {
  auto& s = *http_;
  ExperimentService& svc = service_;

  s.Post("/api/sessions", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    bool synthetic = false;
    if (!req.body.empty()) synthetic = nlohmann::json::parse(req.body).value("synthetic", false);
    reply(res, svc.create_session(synthetic), 201);
  }));

  s.Get(R"(/api/sessions/([0-9a-f]+))",
        guarded([&svc](const httplib::Request& req, httplib::Response& res) {
          reply(res, svc.session(req.matches[1].str()));
        }));

  s.Get(R"(/api/sessions/([0-9a-f]+)/score)",
        guarded([&svc](const httplib::Request& req, httplib::Response& res) {
          reply(res, score_json(svc.session(req.matches[1].str())));
        }));

  s.Get(R"(/api/sessions/([0-9a-f]+)/trials/(\d+))",
        guarded([&svc](const httplib::Request& req, httplib::Response& res) {
          reply(res, svc.get_trial(req.matches[1].str(), trial_param(req)));
        }));

  s.Get(R"(/api/sessions/([0-9a-f]+)/trials/(\d+)/report)",
        guarded([&svc](const httplib::Request& req, httplib::Response& res) {
          const ReportView v = svc.get_report(req.matches[1].str(), trial_param(req));
          reply(res, {{"trial_index", v.trial_index},
                      {"reported_by_as", v.reported_by_as},
                      {"line", v.line}});
        }));

  s.Post(R"(/api/sessions/([0-9a-f]+)/trials/(\d+)/frames)",
         guarded([&svc](const httplib::Request& req, httplib::Response& res) {
           const auto body = nlohmann::json::parse(req.body);
           const auto staged = svc.upload_frames(req.matches[1].str(), trial_param(req),
                                                 frames_from_json(body.at("frames")));
           reply(res, {{"staged_frames", staged}});
         }));

  s.Post(R"(/api/sessions/([0-9a-f]+)/trials/(\d+))",
         guarded([&svc](const httplib::Request& req, httplib::Response& res) {
           const auto body = nlohmann::json::parse(req.body);
           std::optional<sim::Path> frames;
           if (body.contains("frames")) frames = frames_from_json(body.at("frames"));
           const auto survey = body.at("survey").get<design::SurveyResponse>();
           const SubmitResponse r =
               svc.submit_trial(req.matches[1].str(), trial_param(req), frames, survey);
           nlohmann::json j = r.result;
           j["report_line"] = r.report_line;
           reply(res, j);
         }));

  s.Post(R"(/api/sessions/([0-9a-f]+)/abandon)",
         guarded([&svc](const httplib::Request& req, httplib::Response& res) {
           reply(res, svc.abandon(req.matches[1].str()));
         }));

  s.Get("/api/export", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    ExportFilter f;
    if (req.has_param("group")) f.group = design::group_from_string(req.get_param_value("group"));
    if (req.has_param("status")) {
      f.status = session_status_from_string(req.get_param_value("status"));
    }
    if (req.has_param("synthetic")) f.synthetic = req.get_param_value("synthetic") == "true";
    if (req.has_param("frames")) f.include_frames = req.get_param_value("frames") != "false";
    res.set_content(export_lines(svc.export_sessions(f)), "application/x-ndjson");
  }));

  s.Get("/api/config", guarded([&svc](const httplib::Request&, httplib::Response& res) {
    reply(res, {{"world", svc.config().world}, {"questionnaire", design::questionnaire_json()}});
  }));
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int p = http_->bind_to_any_port(host);
    if (p < 0) throw std::runtime_error("cannot bind " + host);
    return p;
  }
  if (!http_->bind_to_port(host, port)) {
    throw std::runtime_error(fmt::format("cannot bind {}:{}", host, port));
  }
  return port;
}

void HttpServer::serve() { http_->listen_after_bind(); }

void HttpServer::stop() {
  if (http_) http_->stop();
}

}  // namespace trustlab::server
