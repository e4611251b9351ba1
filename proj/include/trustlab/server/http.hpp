#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "trustlab/server/service.hpp"

namespace httplib {
class Server;
}

namespace trustlab::server {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::int64_t idle_timeout_ms = 30 * 60 * 1000;  // sessions idle this long are abandoned
  ServiceConfig service;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Reads a JSON config file (when given) and then applies the environment
/// overrides TRUSTLAB_PORT, TRUSTLAB_DATA_DIR and TRUSTLAB_SEED.
ServerConfig load_server_config(const std::optional<std::filesystem::path>& file,
                                const EnvLookup& env = {});

/// HTTP front end for an ExperimentService. Bodies are JSON except the
/// export stream, which is one JSON record per line.
///
///   POST /api/sessions                          create-session
///   GET  /api/sessions/{id}                     session record
///   GET  /api/sessions/{id}/score               get-score
///   GET  /api/sessions/{id}/trials/{k}          get-trial
///   GET  /api/sessions/{id}/trials/{k}/report   searcher report line
///   POST /api/sessions/{id}/trials/{k}/frames   frame batch upload
///   POST /api/sessions/{id}/trials/{k}          submit-trial
///   POST /api/sessions/{id}/abandon
///   GET  /api/export?group=&status=&synthetic=&frames=
///   GET  /api/config                            world constants and prompts
class HttpServer {
 public:
  explicit HttpServer(ExperimentService& service);
  ~HttpServer();

  /// Binds and returns the port (an ephemeral one when `port` is 0).
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  void serve();
  void stop();

 private:
  ExperimentService& service_;
  std::unique_ptr<httplib::Server> http_;
};

}  // namespace trustlab::server
