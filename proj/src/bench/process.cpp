#include "npptwin/bench/process.hpp"

#include "npptwin/error.hpp"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>

#include <fmt/format.h>

#include <thread>

extern char** environ;

namespace npptwin::bench {

ChildProcess::ChildProcess(const std::filesystem::path& exe, const std::vector<std::string>& args,
                           const std::optional<std::filesystem::path>& log) {
  std::vector<std::string> owned;
  owned.push_back(exe.string());
  owned.insert(owned.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : owned) argv.push_back(a.data());
  argv.push_back(nullptr);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  const std::string out = log ? log->string() : "/dev/null";
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, out.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  posix_spawn_file_actions_adddup2(&actions, STDOUT_FILENO, STDERR_FILENO);
  posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);
  const int rc = posix_spawn(&pid_, exe.c_str(), &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) throw Error(ErrorCode::io, fmt::format("cannot spawn {}: {}", exe.string(), std::strerror(rc)));
}

ChildProcess::~ChildProcess() {
  if (pid_ > 0 && !status_) terminate();
}

bool ChildProcess::reap(bool block) {
  if (status_) return true;
  int st = 0;
  const pid_t r = waitpid(pid_, &st, block ? 0 : WNOHANG);
  if (r != pid_) return false;
  status_ = WIFEXITED(st) ? WEXITSTATUS(st) : -WTERMSIG(st);
  return true;
}

bool ChildProcess::running() { return !reap(false); }

std::optional<int> ChildProcess::wait(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (!reap(false)) {
    if (std::chrono::steady_clock::now() >= deadline) return std::nullopt;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  return status_;
}

int ChildProcess::terminate(std::chrono::milliseconds grace) {
  if (!reap(false)) {
    kill(pid_, SIGTERM);
    const auto deadline = std::chrono::steady_clock::now() + grace;
    while (!reap(false) && std::chrono::steady_clock::now() < deadline) {
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    if (!status_) {
      kill(pid_, SIGKILL);
      reap(true);
    }
  }
  return *status_;
}

void wait_for_port(const net::Endpoint& endpoint, std::chrono::milliseconds timeout, ChildProcess* child) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    try {
      net::connect_tcp(endpoint, std::chrono::milliseconds(200));
      return;
    } catch (const Error&) {
    }
    if (child && !child->running()) {
      throw Error(ErrorCode::io, fmt::format("process exited (status {}) before {} accepted connections",
                                             child->exit_status().value_or(0), endpoint.to_string()));
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      throw Error(ErrorCode::io, "timed out waiting for " + endpoint.to_string());
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
}

std::uint16_t free_port() { return net::Listener("127.0.0.1", 0).port(); }

}  // namespace npptwin::bench
