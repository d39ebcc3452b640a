#include "npptwin/mirror/server.hpp"

#include "npptwin/error.hpp"
#include "npptwin/mirror/protocol.hpp"
#include "npptwin/numeric_text.hpp"

#include <fmt/format.h>

namespace npptwin::mirror {

namespace {

std::string list_response() {
  const auto& reg = plant::registry();
  std::string out = fmt::format("OK {}", reg.size());
  for (const auto& v : reg) {
    out += fmt::format("\n{} {} {} {} {}", v.name, v.unit, v.access == plant::Access::read_write ? "rw" : "ro",
                       format_number(v.min), format_number(v.max));
  }
  out += "\nEND";
  return out;
}

std::string ok_clock(std::int64_t t) { return fmt::format("OK {}", t); }

}  // namespace

std::string handle_line(plant::Plant& plant, plant::PlantRunner& runner, std::string_view line) {
  try {
    const MirrorRequest req = parse_request(line);
    switch (req.verb) {
      case Verb::list: return list_response();
      case Verb::get: {
        const double v = plant.read_var(req.names[0]);
        return format_ok(std::span(&v, 1));
      }
      case Verb::mget: return format_ok(plant.read_vars(req.names));
      case Verb::set: {
        const double v = plant.write_var(req.assignments[0].name, req.assignments[0].value);
        return format_ok(std::span(&v, 1));
      }
      case Verb::mset: {
        std::vector<std::pair<std::string, double>> writes;
        writes.reserve(req.assignments.size());
        for (const auto& a : req.assignments) writes.emplace_back(a.name, a.value);
        return format_ok(plant.write_vars(writes));
      }
      case Verb::tick: return ok_clock(plant.sim_time_ms());
      case Verb::mode:
        runner.set_mode(req.mode);
        return ok_clock(plant.sim_time_ms());
      case Verb::advance: return ok_clock(runner.advance(req.advance_ms));
    }
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::not_found:
      case ErrorCode::forbidden:
      case ErrorCode::conflict: return format_error(e.wire_code(), e.what());
      case ErrorCode::bad_request: return format_error(400, e.what());
      default: return format_error(500, e.what());
    }
  }
  return format_error(500, "unhandled verb");
}

MirrorServer::MirrorServer(plant::Plant& plant, plant::PlantRunner& runner, std::string host, std::uint16_t port)
    : plant_(plant), runner_(runner), server_(std::move(host), port, [this](net::Socket& s) { serve(s); }) {}

void MirrorServer::serve(net::Socket& socket) {
  net::LineReader reader(socket, kMaxLineBytes);
  for (;;) {
    std::optional<std::string> line;
    try {
      line = reader.read_line();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::bad_request) throw;
      socket.write_all(format_error(400, e.what()) + "\n");
      return;
    }
    if (!line) return;
    socket.write_all(handle_line(plant_, runner_, *line) + "\n");
  }
}

}  // namespace npptwin::mirror
