#pragma once

#include <signal.h>

#include <spdlog/spdlog.h>

#include <string>

namespace npptwin::tools {

// Blocks SIGINT/SIGTERM in every thread started after this call, so that
// wait_for_shutdown() is the only receiver.
inline sigset_t block_shutdown_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  signal(SIGPIPE, SIG_IGN);
  return set;
}

inline int wait_for_shutdown(const sigset_t& set) {
  int sig = 0;
  sigwait(&set, &sig);
  spdlog::info("signal {}, shutting down", sig);
  return sig;
}

inline void set_log_level(const std::string& level) {
  spdlog::set_level(spdlog::level::from_str(level));
}

}  // namespace npptwin::tools
