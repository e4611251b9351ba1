#include "trustlab/server/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace trustlab::server {
namespace {

[[noreturn]] void io_error(std::string_view what, const std::filesystem::path& p) {
  throw std::runtime_error(fmt::format("{} {}: {}", what, p.string(), std::strerror(errno)));
}

}  // namespace

AppendLog::AppendLog(std::filesystem::path path, bool sync) : path_(std::move(path)), sync_(sync) {}

void AppendLog::append(const nlohmann::json& record) {
  std::string line = record.dump();
  line += '\n';
  const int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) io_error("open", path_);
  std::size_t done = 0;
  while (done < line.size()) {
    const ssize_t n = ::write(fd, line.data() + done, line.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      io_error("write", path_);
    }
    done += static_cast<std::size_t>(n);
  }
  if (sync_ && ::fsync(fd) != 0) {
    ::close(fd);
    io_error("fsync", path_);
  }
  ::close(fd);
}

std::vector<nlohmann::json> AppendLog::read(const std::filesystem::path& path) {
  std::vector<nlohmann::json> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  in.close();

  const std::size_t last_nl = text.rfind('\n');
  const std::size_t complete = last_nl == std::string::npos ? 0 : last_nl + 1;
  if (complete < text.size()) std::filesystem::resize_file(path, complete);

  std::size_t pos = 0, line_no = 0;
  while (pos < complete) {
    const std::size_t end = text.find('\n', pos);
    ++line_no;
    const std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(fmt::format("{} line {}: {}", path.string(), line_no, e.what()));
    }
  }
  return out;
}

SessionStore::SessionStore(std::filesystem::path dir, bool sync) : dir_(std::move(dir)), sync_(sync) {
  std::filesystem::create_directories(dir_ / "sessions");
}

std::filesystem::path SessionStore::session_path(const std::string& session_id) const {
  if (session_id.empty() || session_id.find_first_not_of("0123456789abcdef") != std::string::npos) {
    throw std::invalid_argument("malformed session id");
  }
  return dir_ / "sessions" / (session_id + ".jsonl");
}

void SessionStore::append_index(const nlohmann::json& event) {
  AppendLog(dir_ / "index.jsonl", sync_).append(event);
}

void SessionStore::append_session(const std::string& session_id, const nlohmann::json& event) {
  AppendLog(session_path(session_id), sync_).append(event);
}

std::vector<nlohmann::json> SessionStore::read_index() const {
  return AppendLog::read(dir_ / "index.jsonl");
}

std::vector<nlohmann::json> SessionStore::read_session(const std::string& session_id) const {
  return AppendLog::read(session_path(session_id));
}

}  // namespace trustlab::server
