#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace trustlab::server {

/// Line-delimited JSON file opened for appending. Each append writes one
/// complete line and, when `sync` is set, flushes it to disk before returning.
class AppendLog {
 public:
  AppendLog(std::filesystem::path path, bool sync);

  void append(const nlohmann::json& record);
  const std::filesystem::path& path() const { return path_; }

  /// Parses every complete line. A torn final line (no trailing newline) is
  /// dropped and cut from the file; a malformed complete line throws.
  static std::vector<nlohmann::json> read(const std::filesystem::path& path);

 private:
  std::filesystem::path path_;
  bool sync_;
};

/// On-disk layout:
///   <dir>/index.jsonl               session creation and status events
///   <dir>/sessions/<id>.jsonl       frame batches and accepted trials
class SessionStore {
 public:
  SessionStore(std::filesystem::path dir, bool sync);

  void append_index(const nlohmann::json& event);
  void append_session(const std::string& session_id, const nlohmann::json& event);

  std::vector<nlohmann::json> read_index() const;
  std::vector<nlohmann::json> read_session(const std::string& session_id) const;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path session_path(const std::string& session_id) const;

  std::filesystem::path dir_;
  bool sync_;
};

}  // namespace trustlab::server
