#pragma once

#include "npptwin/net/socket.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace npptwin::twin {

inline constexpr std::uint32_t kMaxFrameBytes = 16u * 1024u * 1024u;

// Bridge envelope: u32 little-endian payload length, then "<id>:<body>".
// The id is kept as text so it echoes back verbatim.
struct Frame {
  std::string id;
  std::string body;

  bool operator==(const Frame&) const = default;
};

bool is_frame_id(std::string_view id);

// Throws Error(bad_request) for a bad id or an oversized payload.
std::string encode_frame(const Frame& frame);
// Splits "<id>:<body>". Throws Error(bad_request).
Frame parse_payload(std::string_view payload);

// Incremental splitter for a byte stream of concatenated frames.
class FrameDecoder {
public:
  void feed(std::string_view bytes);
  // Next complete frame, or nullopt when more bytes are needed. Throws
  // Error(bad_request) when a length prefix exceeds the limit.
  std::optional<Frame> next();
  std::size_t buffered() const { return buffer_.size() - offset_; }

private:
  std::string buffer_;
  std::size_t offset_ = 0;
};

// Blocking socket helpers. read_frame returns nullopt on clean EOF.
std::optional<Frame> read_frame(net::Socket& socket);
void write_frame(net::Socket& socket, const Frame& frame);

}  // namespace npptwin::twin
