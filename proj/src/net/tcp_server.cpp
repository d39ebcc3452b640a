#include "npptwin/net/tcp_server.hpp"

#include <atomic>
#include <spdlog/spdlog.h>

namespace npptwin::net {

TcpServer::TcpServer(std::string host, std::uint16_t port, Handler handler)
    : listener_(host, port), handler_(std::move(handler)) {}

TcpServer::~TcpServer() { stop(); }

void TcpServer::start() {
  if (accept_thread_.joinable()) return;
  accept_thread_ = std::thread([this] { accept_loop(); });
}

void TcpServer::stop() {
  {
    std::lock_guard lock(mutex_);
    if (stopping_) return;
    stopping_ = true;
  }
  listener_.shutdown();
  if (accept_thread_.joinable()) accept_thread_.join();

  std::list<Connection> conns;
  {
    std::lock_guard lock(mutex_);
    for (auto& c : connections_) c.socket->shutdown();
    conns.swap(connections_);
  }
  for (auto& c : conns) {
    if (c.thread.joinable()) c.thread.join();
  }
}

void TcpServer::reap_locked() {
  for (auto it = connections_.begin(); it != connections_.end();) {
    if (*it->done) {
      if (it->thread.joinable()) it->thread.join();
      it = connections_.erase(it);
    } else {
      ++it;
    }
  }
}

void TcpServer::accept_loop() {
  for (;;) {
    auto accepted = listener_.accept();
    if (!accepted) return;
    std::lock_guard lock(mutex_);
    if (stopping_) return;
    reap_locked();
    auto socket = std::make_shared<Socket>(std::move(*accepted));
    auto done = std::make_shared<bool>(false);
    auto& conn = connections_.emplace_back(Connection{socket, {}, done});
    conn.thread = std::thread([this, socket, done] {
      try {
        handler_(*socket);
      } catch (const std::exception& e) {
        spdlog::debug("connection ended: {}", e.what());
      }
      socket->shutdown();
      std::lock_guard lock(mutex_);
      *done = true;
    });
  }
}

}  // namespace npptwin::net
