#pragma once

#include "npptwin/net/socket.hpp"
#include "npptwin/render/image.hpp"

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace npptwin::twin {

// Parsed bridge response body.
struct BridgeReply {
  bool ok = false;
  int code = 0;                        // error code when !ok
  std::vector<std::string> fields;     // whitespace-split text after ok/error <code>
  std::optional<render::Image> image;  // PPM payload, when present
  std::string raw;

  double number(std::size_t i) const;
};

// "ok ...", "error <code> ...", optionally followed by PPM bytes.
BridgeReply parse_bridge_reply(std::string_view body);

// Blocking framed client. Requests on one client are strictly sequential.
class BridgeClient {
public:
  explicit BridgeClient(const net::Endpoint& endpoint,
                        std::chrono::milliseconds timeout = std::chrono::seconds(10));

  // Raw response body for one request body.
  std::string request(std::string_view body);
  BridgeReply call(std::string_view body) { return parse_bridge_reply(request(body)); }
  // Like call(), but throws Error with the reply code unless it is ok.
  BridgeReply expect_ok(std::string_view body);

  // Pipelined: send all frames, then read all replies (ids checked in order).
  std::vector<std::string> request_many(const std::vector<std::string>& bodies);

private:
  net::Socket socket_;
  std::uint64_t next_id_ = 1;
};

}  // namespace npptwin::twin
