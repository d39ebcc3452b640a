#pragma once

#include "npptwin/net/socket.hpp"

#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <thread>

namespace npptwin::net {

// Accept loop with one thread per connection. Stopping shuts down every
// live connection and joins all threads.
class TcpServer {
public:
  using Handler = std::function<void(Socket&)>;

  TcpServer(std::string host, std::uint16_t port, Handler handler);
  ~TcpServer();

  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  std::uint16_t port() const { return listener_.port(); }
  void start();
  void stop();

private:
  struct Connection {
    std::shared_ptr<Socket> socket;
    std::thread thread;
    std::shared_ptr<bool> done;
  };

  void accept_loop();
  void reap_locked();

  Listener listener_;
  Handler handler_;
  std::thread accept_thread_;
  std::mutex mutex_;
  std::list<Connection> connections_;
  bool stopping_ = false;
};

}  // namespace npptwin::net
