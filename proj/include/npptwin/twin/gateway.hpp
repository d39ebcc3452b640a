#pragma once

#include "npptwin/net/tcp_server.hpp"
#include "npptwin/net/websocket.hpp"
#include "npptwin/world/robot.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

namespace npptwin::twin {

class TwinServer;
struct Reply;
struct TwinSnapshot;

// JSON shapes of the browser socket.
nlohmann::json reply_to_json(const nlohmann::json& id, const Reply& reply);
nlohmann::json tick_event(const TwinSnapshot& snapshot);
// Parses {"id":n,"cmd":"..."}; nullopt when malformed.
std::optional<std::pair<nlohmann::json, std::string>> parse_ws_request(std::string_view text);

// Browser gateway: WebSocket endpoint at /ws plus static files.
class Gateway {
public:
  Gateway(TwinServer& twin, std::string host, std::uint16_t port, std::optional<std::filesystem::path> web_root,
          std::chrono::milliseconds event_period);
  ~Gateway();

  std::uint16_t port() const { return server_.port(); }
  void start();
  void stop();

private:
  struct Peer {
    std::shared_ptr<net::WsConnection> conn;
    std::int64_t last_event_ms = -1;
  };

  void handle(net::Socket& socket);
  void serve_socket(net::Socket& socket, const net::HttpRequest& req);
  void serve_static(net::Socket& socket, const net::HttpRequest& req);
  void event_loop();

  TwinServer& twin_;
  std::optional<std::filesystem::path> web_root_;
  std::chrono::milliseconds event_period_;
  net::TcpServer server_;

  std::mutex peers_mutex_;
  std::map<world::SessionId, Peer> peers_;

  std::mutex stop_mutex_;
  std::condition_variable stop_cv_;
  bool stopping_ = false;
  std::thread event_thread_;
};

}  // namespace npptwin::twin
