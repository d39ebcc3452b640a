#pragma once

#include "npptwin/net/socket.hpp"

#include <sys/types.h>

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace npptwin::bench {

// A spawned child process. Terminated (SIGTERM, then SIGKILL) on destruction.
class ChildProcess {
public:
  // stdout and stderr go to `log` when set, otherwise to /dev/null.
  ChildProcess(const std::filesystem::path& exe, const std::vector<std::string>& args,
               const std::optional<std::filesystem::path>& log = std::nullopt);
  ~ChildProcess();

  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  pid_t pid() const { return pid_; }
  bool running();
  // Exit status once reaped; -signal when killed by a signal.
  std::optional<int> exit_status() const { return status_; }
  // Waits for the child to exit on its own. Empty on timeout.
  std::optional<int> wait(std::chrono::milliseconds timeout);
  // Returns the exit status.
  int terminate(std::chrono::milliseconds grace = std::chrono::seconds(5));

private:
  bool reap(bool block);

  pid_t pid_ = -1;
  std::optional<int> status_;
};

// Retries a TCP connect until it succeeds. Throws Error(io) on timeout or
// when `child` exits first.
void wait_for_port(const net::Endpoint& endpoint, std::chrono::milliseconds timeout, ChildProcess* child = nullptr);

// An ephemeral port that was free a moment ago.
std::uint16_t free_port();

}  // namespace npptwin::bench
