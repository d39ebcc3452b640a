#include "npptwin/twin/frame.hpp"

#include "npptwin/error.hpp"

#include <array>
#include <fmt/format.h>

namespace npptwin::twin {

namespace {

std::uint32_t read_le32(const char* p) {
  const auto* u = reinterpret_cast<const unsigned char*>(p);
  return static_cast<std::uint32_t>(u[0]) | (static_cast<std::uint32_t>(u[1]) << 8) |
         (static_cast<std::uint32_t>(u[2]) << 16) | (static_cast<std::uint32_t>(u[3]) << 24);
}

void append_le32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void check_length(std::size_t n) {
  if (n > kMaxFrameBytes) throw Error(ErrorCode::bad_request, fmt::format("frame of {} bytes exceeds 16 MiB", n));
}

}  // namespace

bool is_frame_id(std::string_view id) {
  if (id.empty() || id.size() > 20) return false;
  for (char c : id) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

std::string encode_frame(const Frame& frame) {
  if (!is_frame_id(frame.id)) throw Error(ErrorCode::bad_request, fmt::format("bad frame id '{}'", frame.id));
  const std::size_t n = frame.id.size() + 1 + frame.body.size();
  check_length(n);
  std::string out;
  out.reserve(4 + n);
  append_le32(out, static_cast<std::uint32_t>(n));
  out += frame.id;
  out += ':';
  out += frame.body;
  return out;
}

Frame parse_payload(std::string_view payload) {
  const auto colon = payload.find(':');
  if (colon == std::string_view::npos) throw Error(ErrorCode::bad_request, "frame payload lacks '<id>:'");
  Frame f{std::string(payload.substr(0, colon)), std::string(payload.substr(colon + 1))};
  if (!is_frame_id(f.id)) throw Error(ErrorCode::bad_request, fmt::format("bad frame id '{}'", f.id));
  return f;
}

void FrameDecoder::feed(std::string_view bytes) {
  if (offset_ > 0 && offset_ == buffer_.size()) {
    buffer_.clear();
    offset_ = 0;
  }
  buffer_.append(bytes);
}

std::optional<Frame> FrameDecoder::next() {
  if (buffered() < 4) return std::nullopt;
  const std::uint32_t n = read_le32(buffer_.data() + offset_);
  check_length(n);
  if (buffered() < 4 + static_cast<std::size_t>(n)) return std::nullopt;
  Frame f = parse_payload(std::string_view(buffer_).substr(offset_ + 4, n));
  offset_ += 4 + n;
  if (offset_ > 1 << 20 && offset_ * 2 > buffer_.size()) {
    buffer_.erase(0, offset_);
    offset_ = 0;
  }
  return f;
}

std::optional<Frame> read_frame(net::Socket& socket) {
  std::array<std::uint8_t, 4> header{};
  if (!socket.read_exact(header)) return std::nullopt;
  const std::uint32_t n = read_le32(reinterpret_cast<const char*>(header.data()));
  check_length(n);
  std::string payload(n, '\0');
  if (n > 0 && !socket.read_exact(std::span(reinterpret_cast<std::uint8_t*>(payload.data()), n))) {
    throw Error(ErrorCode::io, "connection closed mid-frame");
  }
  return parse_payload(payload);
}

void write_frame(net::Socket& socket, const Frame& frame) { socket.write_all(encode_frame(frame)); }

}  // namespace npptwin::twin
