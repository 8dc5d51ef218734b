#include "dfbench/detector_client.hpp"

#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstring>
#include <map>
#include <optional>
#include <thread>

#include <sys/wait.h>
#include <unistd.h>

#include "json.hpp"

namespace dfbench {

namespace {

using json = nlohmann::json;

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

bool write_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    off += static_cast<std::size_t>(n);
  }
  return true;
}

class SigpipeGuard {
 public:
  SigpipeGuard() {
    struct sigaction ignore {};
    ignore.sa_handler = SIG_IGN;
    sigemptyset(&ignore.sa_mask);
    ::sigaction(SIGPIPE, &ignore, &saved_);
  }
  ~SigpipeGuard() { ::sigaction(SIGPIPE, &saved_, nullptr); }

 private:
  struct sigaction saved_ {};
};

}  // namespace

DetectorRun run_detector(const std::string& command, std::span<const DetectorRequest> requests, double fallback) {
  SigpipeGuard guard;
  int to_child[2], from_child[2];
  if (::pipe(to_child) != 0) throw IoError(std::string("pipe: ") + std::strerror(errno));
  if (::pipe(from_child) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw IoError(std::string("pipe: ") + std::strerror(errno));
  }
  const pid_t pid = ::fork();
  if (pid < 0) {
    const int err = errno;
    for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
    throw IoError(std::string("fork: ") + std::strerror(err));
  }
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  int write_fd = to_child[1];
  int read_fd = from_child[0];

  DetectorRun run;
  bool write_failed = false;
  std::thread writer([&] {
    for (const auto& r : requests) {
      json line = {{"id", r.id}, {"image_path", r.image_path}};
      if (!write_all(write_fd, line.dump() + "\n")) {
        write_failed = true;
        break;
      }
    }
    close_fd(write_fd);
  });

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < requests.size(); ++i) index.emplace(requests[i].id, i);
  std::vector<std::optional<double>> scores(requests.size());
  std::vector<bool> answered(requests.size(), false);

  auto handle_line = [&](const std::string& line) {
    if (line.empty()) return;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception&) {
      run.log.push_back("malformed response line: " + line.substr(0, 200));
      return;
    }
    if (!rec.is_object() || !rec.contains("id") || !rec["id"].is_string()) {
      run.log.push_back("response without a string id: " + line.substr(0, 200));
      return;
    }
    const auto id = rec["id"].get<std::string>();
    auto it = index.find(id);
    if (it == index.end()) {
      run.log.push_back("response for unknown id '" + id + "'");
      return;
    }
    if (answered[it->second]) {
      run.log.push_back("duplicate response for '" + id + "' ignored");
      return;
    }
    answered[it->second] = true;
    if (rec.contains("error")) {
      run.log.push_back("detector error for '" + id + "': " +
                        (rec["error"].is_string() ? rec["error"].get<std::string>() : rec["error"].dump()));
      return;
    }
    if (!rec.contains("score") || !rec["score"].is_number()) {
      run.log.push_back("response for '" + id + "' has no numeric score");
      return;
    }
    const double s = rec["score"].get<double>();
    if (!std::isfinite(s) || s < 0.0 || s > 1.0) {
      run.log.push_back("score for '" + id + "' outside [0, 1]");
      return;
    }
    scores[it->second] = s;
  };

  std::string pending;
  char buf[65536];
  for (;;) {
    const ssize_t n = ::read(read_fd, buf, sizeof buf);
    if (n < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (n == 0) break;
    pending.append(buf, static_cast<std::size_t>(n));
    std::size_t start = 0, nl;
    while ((nl = pending.find('\n', start)) != std::string::npos) {
      handle_line(pending.substr(start, nl - start));
      start = nl + 1;
    }
    pending.erase(0, start);
  }
  handle_line(pending);
  close_fd(read_fd);
  writer.join();

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  run.exit_status = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  if (run.exit_status != 0) run.log.push_back("detector exited with status " + std::to_string(run.exit_status));
  if (write_failed) run.log.push_back("detector closed its input before all requests were sent");

  run.rows.reserve(requests.size());
  for (std::size_t i = 0; i < requests.size(); ++i) {
    if (!answered[i]) run.log.push_back("no response for '" + requests[i].id + "'");
    run.rows.push_back({requests[i].id, scores[i].value_or(fallback)});
  }
  return run;
}

}  // namespace dfbench
