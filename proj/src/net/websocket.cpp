#include "npptwin/net/websocket.hpp"

#include "npptwin/error.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <random>

namespace npptwin::net {

namespace {

constexpr std::size_t kMaxHead = 16 * 1024;
constexpr std::string_view kWsGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool read_bytes(Socket& socket, std::uint8_t* out, std::size_t n) {
  return socket.read_exact(std::span<std::uint8_t>(out, n));
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string base64_encode(std::string_view bytes) {
  return base64_encode(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw Error(ErrorCode::bad_request, "base64 length not a multiple of 4");
  std::vector<std::uint8_t> out(3 * (text.size() / 4));
  int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
  if (n < 0) throw Error(ErrorCode::bad_request, "malformed base64");
  std::size_t pad = 0;
  if (!text.empty() && text.back() == '=') ++pad;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

std::string websocket_accept_key(std::string_view client_key) {
  std::string material = std::string(client_key) + std::string(kWsGuid);
  std::array<std::uint8_t, SHA_DIGEST_LENGTH> digest{};
  SHA1(reinterpret_cast<const unsigned char*>(material.data()), material.size(), digest.data());
  return base64_encode(std::span<const std::uint8_t>(digest));
}

std::optional<std::string> HttpRequest::header(const std::string& lower_name) const {
  auto it = headers.find(lower_name);
  if (it == headers.end()) return std::nullopt;
  return it->second;
}

std::optional<HttpRequest> read_http_request(Socket& socket) {
  // Byte-wise so nothing past the head is consumed.
  std::string head;
  std::uint8_t c = 0;
  while (head.size() < 4 || head.compare(head.size() - 4, 4, "\r\n\r\n") != 0) {
    if (!read_bytes(socket, &c, 1)) {
      if (head.empty()) return std::nullopt;
      throw Error(ErrorCode::bad_request, "truncated request head");
    }
    head.push_back(static_cast<char>(c));
    if (head.size() > kMaxHead) throw Error(ErrorCode::bad_request, "request head too large");
  }

  HttpRequest req;
  std::string_view rest(head);
  auto line_end = rest.find("\r\n");
  std::string_view request_line = rest.substr(0, line_end);
  rest.remove_prefix(line_end + 2);
  auto sp1 = request_line.find(' ');
  auto sp2 = request_line.rfind(' ');
  if (sp1 == std::string_view::npos || sp2 == sp1) throw Error(ErrorCode::bad_request, "malformed request line");
  req.method = std::string(request_line.substr(0, sp1));
  req.target = std::string(request_line.substr(sp1 + 1, sp2 - sp1 - 1));
  while (!rest.empty()) {
    line_end = rest.find("\r\n");
    std::string_view line = rest.substr(0, line_end);
    rest.remove_prefix(line_end + 2);
    if (line.empty()) break;
    auto colon = line.find(':');
    if (colon == std::string_view::npos) throw Error(ErrorCode::bad_request, "malformed header");
    req.headers[lower(trim(line.substr(0, colon)))] = std::string(trim(line.substr(colon + 1)));
  }
  return req;
}

void write_http_response(Socket& socket, int status, std::string_view reason, std::string_view content_type,
                         std::string_view body) {
  socket.write_all(fmt::format("HTTP/1.1 {} {}\r\nContent-Type: {}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
                               status, reason, content_type, body.size()));
  socket.write_all(body);
}

std::optional<WsMessage> WsConnection::read() {
  WsMessage message;
  bool assembling = false;
  for (;;) {
    std::array<std::uint8_t, 2> hdr{};
    if (!read_bytes(socket_, hdr.data(), 2)) return std::nullopt;
    const bool fin = (hdr[0] & 0x80) != 0;
    if ((hdr[0] & 0x70) != 0) throw Error(ErrorCode::bad_request, "reserved websocket bits set");
    const auto opcode = static_cast<WsOpcode>(hdr[0] & 0x0f);
    const bool masked = (hdr[1] & 0x80) != 0;
    std::uint64_t len = hdr[1] & 0x7f;
    if (len == 126) {
      std::array<std::uint8_t, 2> ext{};
      if (!read_bytes(socket_, ext.data(), 2)) return std::nullopt;
      len = (std::uint64_t{ext[0]} << 8) | ext[1];
    } else if (len == 127) {
      std::array<std::uint8_t, 8> ext{};
      if (!read_bytes(socket_, ext.data(), 8)) return std::nullopt;
      len = 0;
      for (auto b : ext) len = (len << 8) | b;
    }
    if (len > kMaxMessage || message.payload.size() + len > kMaxMessage) {
      throw Error(ErrorCode::bad_request, "websocket message too large");
    }
    // Clients must mask, servers must not.
    if (masked == client_side_) throw Error(ErrorCode::bad_request, "wrong websocket masking");
    std::array<std::uint8_t, 4> mask{};
    if (masked && !read_bytes(socket_, mask.data(), 4)) return std::nullopt;
    std::string payload(len, '\0');
    if (len > 0 && !read_bytes(socket_, reinterpret_cast<std::uint8_t*>(payload.data()), len)) return std::nullopt;
    if (masked) {
      for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<char>(payload[i] ^ mask[i % 4]);
    }

    switch (opcode) {
      case WsOpcode::ping:
        send_frame(WsOpcode::pong, payload);
        continue;
      case WsOpcode::pong:
        continue;
      case WsOpcode::close:
        send_close();
        return std::nullopt;
      case WsOpcode::text:
      case WsOpcode::binary:
        if (assembling) throw Error(ErrorCode::bad_request, "new message inside a fragmented one");
        message.opcode = opcode;
        message.payload = std::move(payload);
        assembling = true;
        break;
      case WsOpcode::continuation:
        if (!assembling) throw Error(ErrorCode::bad_request, "continuation without a message");
        message.payload += payload;
        break;
      default:
        throw Error(ErrorCode::bad_request, "unknown websocket opcode");
    }
    if (fin) return message;
  }
}

bool WsConnection::send_frame(WsOpcode opcode, std::string_view payload) {
  std::string frame;
  frame.push_back(static_cast<char>(0x80 | static_cast<std::uint8_t>(opcode)));
  const std::uint8_t mask_bit = client_side_ ? 0x80 : 0x00;
  const std::size_t len = payload.size();
  if (len < 126) {
    frame.push_back(static_cast<char>(mask_bit | len));
  } else if (len <= 0xffff) {
    frame.push_back(static_cast<char>(mask_bit | 126));
    frame.push_back(static_cast<char>(len >> 8));
    frame.push_back(static_cast<char>(len & 0xff));
  } else {
    frame.push_back(static_cast<char>(mask_bit | 127));
    for (int shift = 56; shift >= 0; shift -= 8) frame.push_back(static_cast<char>((std::uint64_t{len} >> shift) & 0xff));
  }
  if (client_side_) {
    static thread_local std::mt19937 rng{std::random_device{}()};
    std::array<std::uint8_t, 4> mask{};
    for (auto& b : mask) b = static_cast<std::uint8_t>(rng());
    frame.append(reinterpret_cast<const char*>(mask.data()), 4);
    std::size_t start = frame.size();
    frame.append(payload);
    for (std::size_t i = 0; i < len; ++i) frame[start + i] = static_cast<char>(frame[start + i] ^ mask[i % 4]);
  } else {
    frame.append(payload);
  }

  std::lock_guard lock(write_mutex_);
  if (closed_) return false;
  try {
    socket_.write_all(frame);
  } catch (const Error&) {
    closed_ = true;
    return false;
  }
  if (opcode == WsOpcode::close) closed_ = true;
  return true;
}

bool WsConnection::send_text(std::string_view text) { return send_frame(WsOpcode::text, text); }

bool WsConnection::send_binary(std::string_view bytes) { return send_frame(WsOpcode::binary, bytes); }

void WsConnection::send_close(std::uint16_t code) {
  std::string payload;
  payload.push_back(static_cast<char>(code >> 8));
  payload.push_back(static_cast<char>(code & 0xff));
  send_frame(WsOpcode::close, payload);
}

void WsConnection::mark_closed() {
  std::lock_guard lock(write_mutex_);
  closed_ = true;
}

WsClient::WsClient(const Endpoint& endpoint, const std::string& path) : conn_(socket_, true) {
  socket_ = connect_tcp(endpoint);
  std::array<std::uint8_t, 16> nonce{};
  std::random_device rd;
  for (auto& b : nonce) b = static_cast<std::uint8_t>(rd());
  const std::string key = base64_encode(std::span<const std::uint8_t>(nonce));
  socket_.write_all(fmt::format("GET {} HTTP/1.1\r\nHost: {}\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
                                "Sec-WebSocket-Key: {}\r\nSec-WebSocket-Version: 13\r\n\r\n",
                                path, endpoint.to_string(), key));
  // The response head has the same shape as a request head: a first line
  // followed by headers.
  auto head = read_http_request(socket_);
  if (!head || head->target.rfind("101", 0) != 0) throw Error(ErrorCode::io, "websocket handshake refused");
  if (head->header("sec-websocket-accept") != websocket_accept_key(key)) {
    throw Error(ErrorCode::io, "websocket handshake: bad accept key");
  }
}

void WsClient::close() {
  conn_.send_close();
  socket_.shutdown();
}

}  // namespace npptwin::net
