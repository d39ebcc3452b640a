#include "npptwin/twin/client.hpp"

#include "npptwin/error.hpp"
#include "npptwin/numeric_text.hpp"
#include "npptwin/twin/frame.hpp"

#include <fmt/format.h>

namespace npptwin::twin {

double BridgeReply::number(std::size_t i) const {
  if (i >= fields.size()) throw Error(ErrorCode::bad_request, fmt::format("reply has no field {}", i));
  auto v = parse_decimal(fields[i]);
  if (!v) throw Error(ErrorCode::bad_request, "not a number: " + fields[i]);
  return *v;
}

BridgeReply parse_bridge_reply(std::string_view body) {
  BridgeReply r;
  r.raw = std::string(body);
  std::string_view text = body;
  auto ppm = body.find("P6\n");
  if (ppm != std::string_view::npos && (ppm == 0 || body[ppm - 1] == ' ')) {
    r.image = render::decode_ppm(body.substr(ppm));
    text = body.substr(0, ppm);
  }
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\n')) ++pos;
    auto end = pos;
    while (end < text.size() && text[end] != ' ' && text[end] != '\n') ++end;
    if (end > pos) r.fields.emplace_back(text.substr(pos, end - pos));
    pos = end;
  }
  if (r.fields.empty()) throw Error(ErrorCode::bad_request, "empty bridge reply");
  if (r.fields[0] == "ok") {
    r.ok = true;
  } else if (r.fields[0] == "error" && r.fields.size() >= 2) {
    r.code = static_cast<int>(parse_count(r.fields[1]).value_or(0));
    r.fields.erase(r.fields.begin());
  } else {
    throw Error(ErrorCode::bad_request, "malformed bridge reply");
  }
  r.fields.erase(r.fields.begin());
  return r;
}

BridgeClient::BridgeClient(const net::Endpoint& endpoint, std::chrono::milliseconds timeout)
    : socket_(net::connect_tcp(endpoint, timeout)) {
  socket_.set_receive_timeout(timeout);
  socket_.set_nodelay();
}

std::string BridgeClient::request(std::string_view body) {
  const std::string id = std::to_string(next_id_++);
  write_frame(socket_, Frame{id, std::string(body)});
  auto reply = read_frame(socket_);
  if (!reply) throw Error(ErrorCode::io, "bridge closed the connection");
  if (reply->id != id) throw Error(ErrorCode::io, fmt::format("reply id {} for request {}", reply->id, id));
  return std::move(reply->body);
}

BridgeReply BridgeClient::expect_ok(std::string_view body) {
  auto r = call(body);
  if (!r.ok) {
    std::string detail;
    for (const auto& f : r.fields) detail += f + " ";
    throw Error(static_cast<ErrorCode>(r.code), fmt::format("{} -> error {}", body, detail));
  }
  return r;
}

std::vector<std::string> BridgeClient::request_many(const std::vector<std::string>& bodies) {
  std::string out;
  const std::uint64_t first = next_id_;
  for (const auto& b : bodies) out += encode_frame(Frame{std::to_string(next_id_++), b});
  socket_.write_all(out);
  std::vector<std::string> replies;
  replies.reserve(bodies.size());
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    auto reply = read_frame(socket_);
    if (!reply) throw Error(ErrorCode::io, "bridge closed the connection");
    if (reply->id != std::to_string(first + i)) throw Error(ErrorCode::io, "out-of-order reply id " + reply->id);
    replies.push_back(std::move(reply->body));
  }
  return replies;
}

}  // namespace npptwin::twin
