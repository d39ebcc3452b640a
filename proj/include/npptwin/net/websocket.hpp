#pragma once

#include "npptwin/net/socket.hpp"

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace npptwin::net {

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::string base64_encode(std::string_view bytes);
// Throws Error(bad_request) on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

// Sec-WebSocket-Accept for a client key (RFC 6455 section 4.2.2).
std::string websocket_accept_key(std::string_view client_key);

struct HttpRequest {
  std::string method;
  std::string target;
  std::map<std::string, std::string> headers;  // lower-cased names

  std::optional<std::string> header(const std::string& lower_name) const;
};

// Reads one request head (no body). nullopt on EOF before any byte. Throws
// Error(bad_request) on malformed or oversized heads.
std::optional<HttpRequest> read_http_request(Socket& socket);

void write_http_response(Socket& socket, int status, std::string_view reason, std::string_view content_type,
                         std::string_view body);

enum class WsOpcode : std::uint8_t { continuation = 0, text = 1, binary = 2, close = 8, ping = 9, pong = 10 };

struct WsMessage {
  WsOpcode opcode = WsOpcode::text;
  std::string payload;
};

// Message-level WebSocket over an established socket. Sends are serialized
// and safe from several threads; reads belong to one thread.
class WsConnection {
public:
  static constexpr std::size_t kMaxMessage = 16u * 1024u * 1024u;

  WsConnection(Socket& socket, bool client_side) : socket_(socket), client_side_(client_side) {}

  // Next text or binary message; answers pings and returns nullopt on close
  // or EOF. Throws Error(bad_request) on protocol violations.
  std::optional<WsMessage> read();

  // Return false once the connection is closed.
  bool send_text(std::string_view text);
  bool send_binary(std::string_view bytes);
  void send_close(std::uint16_t code = 1000);

  // After this no further bytes are written.
  void mark_closed();

private:
  bool send_frame(WsOpcode opcode, std::string_view payload);

  Socket& socket_;
  bool client_side_;
  std::mutex write_mutex_;
  bool closed_ = false;
};

// Test and tooling client: connects and performs the opening handshake.
class WsClient {
public:
  // Throws Error(io) when the connection or handshake fails.
  WsClient(const Endpoint& endpoint, const std::string& path);

  std::optional<WsMessage> read() { return conn_.read(); }
  bool send_text(std::string_view text) { return conn_.send_text(text); }
  void close();
  Socket& socket() { return socket_; }

private:
  Socket socket_;
  WsConnection conn_;
};

}  // namespace npptwin::net
