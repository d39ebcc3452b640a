#include "npptwin/mirror/client.hpp"

#include "npptwin/error.hpp"
#include "npptwin/numeric_text.hpp"

#include <fmt/format.h>

namespace npptwin::mirror {

namespace {

ErrorCode code_from_wire(int code) {
  switch (code) {
    case 400: return ErrorCode::bad_request;
    case 403: return ErrorCode::forbidden;
    case 404: return ErrorCode::not_found;
    case 409: return ErrorCode::conflict;
    default: return ErrorCode::io;
  }
}

}  // namespace

MirrorClient::MirrorClient(const net::Endpoint& endpoint, std::chrono::milliseconds timeout)
    : socket_(net::connect_tcp(endpoint, timeout)), reader_(socket_, kMaxLineBytes) {
  socket_.set_receive_timeout(timeout);
}

std::string MirrorClient::request_line(std::string_view line) {
  std::string out(line);
  out += '\n';
  socket_.write_all(out);
  auto resp = reader_.read_line();
  if (!resp) throw Error(ErrorCode::io, "mirror connection closed");
  return *resp;
}

std::vector<double> MirrorClient::expect_ok(std::string_view line) {
  MirrorResponse r = parse_response(request_line(line));
  if (!r.ok) throw Error(code_from_wire(r.code), r.detail);
  return std::move(r.values);
}

std::vector<plant::VariableDescriptor> MirrorClient::list() {
  const auto header = expect_ok("LIST");
  if (header.size() != 1 || header[0] < 0) throw Error(ErrorCode::io, "malformed LIST header");
  const auto count = static_cast<std::size_t>(header[0]);
  std::vector<plant::VariableDescriptor> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto line = reader_.read_line();
    if (!line) throw Error(ErrorCode::io, "mirror connection closed during LIST");
    std::vector<std::string> f;
    std::size_t start = 0;
    while (start <= line->size()) {
      const auto sp = line->find(' ', start);
      f.push_back(line->substr(start, sp == std::string::npos ? std::string::npos : sp - start));
      if (sp == std::string::npos) break;
      start = sp + 1;
    }
    if (f.size() != 5) throw Error(ErrorCode::io, fmt::format("malformed LIST entry '{}'", *line));
    auto lo = parse_decimal(f[3]);
    auto hi = parse_decimal(f[4]);
    if (!lo || !hi || (f[2] != "ro" && f[2] != "rw")) {
      throw Error(ErrorCode::io, fmt::format("malformed LIST entry '{}'", *line));
    }
    out.push_back({f[0], f[1], f[2] == "rw" ? plant::Access::read_write : plant::Access::read_only, *lo, *hi});
  }
  auto end = reader_.read_line();
  if (!end || *end != "END") throw Error(ErrorCode::io, "LIST not terminated by END");
  return out;
}

double MirrorClient::get(std::string_view name) {
  const auto v = expect_ok(fmt::format("GET {}", name));
  if (v.size() != 1) throw Error(ErrorCode::io, "GET returned wrong arity");
  return v[0];
}

std::vector<double> MirrorClient::mget(std::span<const std::string> names) {
  MirrorRequest req;
  req.verb = Verb::mget;
  req.names.assign(names.begin(), names.end());
  auto v = expect_ok(format_request(req));
  if (v.size() != names.size()) throw Error(ErrorCode::io, "MGET returned wrong arity");
  return v;
}

double MirrorClient::set(std::string_view name, double value) {
  const auto v = expect_ok(fmt::format("SET {} {}", name, format_number(value)));
  if (v.size() != 1) throw Error(ErrorCode::io, "SET returned wrong arity");
  return v[0];
}

std::vector<double> MirrorClient::mset(std::span<const std::pair<std::string, double>> writes) {
  MirrorRequest req;
  req.verb = Verb::mset;
  for (const auto& [name, value] : writes) req.assignments.push_back({name, format_number(value), value});
  auto v = expect_ok(format_request(req));
  if (v.size() != writes.size()) throw Error(ErrorCode::io, "MSET returned wrong arity");
  return v;
}

std::int64_t MirrorClient::tick() { return static_cast<std::int64_t>(expect_ok("TICK").at(0)); }

std::int64_t MirrorClient::mode(plant::ClockMode mode) {
  return static_cast<std::int64_t>(expect_ok(fmt::format("MODE {}", plant::to_string(mode))).at(0));
}

std::int64_t MirrorClient::advance(std::int64_t ms) {
  return static_cast<std::int64_t>(expect_ok(fmt::format("ADVANCE {}", ms)).at(0));
}

}  // namespace npptwin::mirror
