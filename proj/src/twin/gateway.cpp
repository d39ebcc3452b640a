#include "npptwin/twin/gateway.hpp"

#include "npptwin/error.hpp"
#include "npptwin/twin/server.hpp"

#include <spdlog/spdlog.h>

#include <fstream>
#include <sstream>

namespace npptwin::twin {

using nlohmann::json;

json reply_to_json(const json& id, const Reply& reply) {
  json out{{"id", id}, {"status", reply.ok ? "ok" : "error"}};
  const std::string detail = reply.detail();
  if (reply.image) {
    const auto& px = reply.image->pixels();
    out["image"] = {{"w", reply.image->width()},
                    {"h", reply.image->height()},
                    {"b64", net::base64_encode(std::span<const std::uint8_t>(px.data(), px.size()))}};
    if (!detail.empty()) out["body"] = detail;
  } else {
    out["body"] = detail;
  }
  return out;
}

json tick_event(const TwinSnapshot& snapshot) {
  json robots = json::array();
  for (const auto& [id, r] : snapshot.world.robots()) {
    robots.push_back({{"id", id},
                      {"kind", std::string(world::to_string(r.kind))},
                      {"x", r.pose.x_m},
                      {"y", r.pose.y_m},
                      {"z", r.pose.z_m},
                      {"yaw", r.pose.yaw_deg}});
  }
  json plant = json::object();
  for (const auto& [name, value] : snapshot.plant->values) plant[name] = value;
  return {{"event", "tick"}, {"t_ms", snapshot.t_ms}, {"robots", robots}, {"plant", plant}};
}

std::optional<std::pair<json, std::string>> parse_ws_request(std::string_view text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
  auto id = doc.find("id");
  auto cmd = doc.find("cmd");
  if (id == doc.end() || cmd == doc.end()) return std::nullopt;
  if (!id->is_number_integer() || !cmd->is_string()) return std::nullopt;
  return std::make_pair(*id, cmd->get<std::string>());
}

Gateway::Gateway(TwinServer& twin, std::string host, std::uint16_t port,
                 std::optional<std::filesystem::path> web_root, std::chrono::milliseconds event_period)
    : twin_(twin),
      web_root_(std::move(web_root)),
      event_period_(event_period),
      server_(std::move(host), port, [this](net::Socket& socket) { handle(socket); }) {}

Gateway::~Gateway() { stop(); }

void Gateway::start() {
  {
    std::lock_guard lock(stop_mutex_);
    stopping_ = false;
  }
  server_.start();
  event_thread_ = std::thread([this] { event_loop(); });
}

void Gateway::stop() {
  {
    std::lock_guard lock(stop_mutex_);
    stopping_ = true;
  }
  stop_cv_.notify_all();
  if (event_thread_.joinable()) event_thread_.join();
  server_.stop();
}

void Gateway::handle(net::Socket& socket) {
  try {
    auto req = net::read_http_request(socket);
    if (!req) return;
    auto upgrade = req->header("upgrade");
    std::string path = req->target.substr(0, req->target.find('?'));
    if (path == "/ws" && upgrade && (*upgrade == "websocket" || *upgrade == "WebSocket")) {
      serve_socket(socket, *req);
    } else {
      serve_static(socket, *req);
    }
  } catch (const std::exception& e) {
    spdlog::debug("gateway connection closed: {}", e.what());
  }
}

void Gateway::serve_socket(net::Socket& socket, const net::HttpRequest& req) {
  auto key = req.header("sec-websocket-key");
  if (!key) {
    net::write_http_response(socket, 400, "Bad Request", "text/plain", "missing Sec-WebSocket-Key\n");
    return;
  }
  socket.write_all("HTTP/1.1 101 Switching Protocols\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
                   "Sec-WebSocket-Accept: " +
                   net::websocket_accept_key(*key) + "\r\n\r\n");
  socket.set_nodelay();

  auto conn = std::make_shared<net::WsConnection>(socket, false);
  const SessionId session = twin_.open_session(Transport::websocket);
  {
    std::lock_guard lock(peers_mutex_);
    peers_[session] = Peer{conn, -1};
  }
  try {
    while (auto msg = conn->read()) {
      auto request = msg->opcode == net::WsOpcode::text ? parse_ws_request(msg->payload) : std::nullopt;
      if (!request) {
        conn->send_text(json{{"id", nullptr}, {"status", "error"}, {"body", "400"}}.dump());
        continue;
      }
      Reply reply = twin_.execute(session, request->second);
      if (!conn->send_text(reply_to_json(request->first, reply).dump())) break;
    }
  } catch (const std::exception& e) {
    spdlog::debug("ws session {} ended: {}", session, e.what());
  }
  {
    std::lock_guard lock(peers_mutex_);
    peers_.erase(session);
  }
  conn->mark_closed();
  twin_.close_session(session);
}

void Gateway::serve_static(net::Socket& socket, const net::HttpRequest& req) {
  if (req.method != "GET") {
    net::write_http_response(socket, 405, "Method Not Allowed", "text/plain", "GET only\n");
    return;
  }
  std::string path = req.target.substr(0, req.target.find('?'));
  if (path == "/") path = "/index.html";
  if (!web_root_ || path.find("..") != std::string::npos) {
    net::write_http_response(socket, 404, "Not Found", "text/plain", "not found\n");
    return;
  }
  std::ifstream in(*web_root_ / path.substr(1), std::ios::binary);
  if (!in) {
    net::write_http_response(socket, 404, "Not Found", "text/plain", "not found\n");
    return;
  }
  std::ostringstream body;
  body << in.rdbuf();
  auto ext = std::filesystem::path(path).extension().string();
  std::string type = "application/octet-stream";
  if (ext == ".html") type = "text/html; charset=utf-8";
  if (ext == ".js") type = "text/javascript";
  if (ext == ".css") type = "text/css";
  if (ext == ".json") type = "application/json";
  net::write_http_response(socket, 200, "OK", type, body.str());
}

void Gateway::event_loop() {
  for (;;) {
    {
      std::unique_lock lock(stop_mutex_);
      if (stop_cv_.wait_for(lock, event_period_, [this] { return stopping_; })) return;
    }
    auto snap = twin_.snapshot();
    std::optional<std::string> text;
    std::vector<std::shared_ptr<net::WsConnection>> targets;
    {
      std::lock_guard lock(peers_mutex_);
      for (auto& [session, peer] : peers_) {
        if (!twin_.events_enabled(session) || snap->t_ms <= peer.last_event_ms) continue;
        peer.last_event_ms = snap->t_ms;
        targets.push_back(peer.conn);
      }
    }
    if (targets.empty()) continue;
    text = tick_event(*snap).dump();
    for (auto& conn : targets) conn->send_text(*text);
  }
}

}  // namespace npptwin::twin
