#include "npptwin/mirror/protocol.hpp"

#include "npptwin/error.hpp"
#include "npptwin/numeric_text.hpp"

#include <fmt/format.h>

namespace npptwin::mirror {

namespace {

[[noreturn]] void reject(std::string_view why) { throw Error(ErrorCode::bad_request, std::string(why)); }

// Split on single spaces. Empty fields (double, leading or trailing spaces)
// are a grammar violation.
std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto sp = line.find(' ', start);
    const auto field = line.substr(start, sp == std::string_view::npos ? std::string_view::npos : sp - start);
    if (field.empty()) reject("empty field");
    out.push_back(field);
    if (sp == std::string_view::npos) break;
    start = sp + 1;
  }
  return out;
}

std::string require_name(std::string_view s) {
  if (!is_variable_name(s)) reject(fmt::format("bad variable name '{}'", s));
  return std::string(s);
}

Assignment make_assignment(std::string_view name, std::string_view literal) {
  auto value = parse_decimal(literal);
  if (!value) reject(fmt::format("bad decimal '{}'", literal));
  return Assignment{require_name(name), std::string(literal), *value};
}

}  // namespace

bool is_variable_name(std::string_view name) {
  if (name.empty()) return false;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    if (!ok) return false;
  }
  return true;
}

MirrorRequest parse_request(std::string_view line) {
  if (line.size() > kMaxLineBytes) reject("line too long");
  if (line.empty()) reject("empty request");
  for (char c : line) {
    if (c == '\r' || c == '\n' || c == '\t') reject("control character in request");
  }
  const auto f = split_fields(line);
  const std::string_view verb = f[0];
  const std::size_t argc = f.size() - 1;
  MirrorRequest req;

  if (verb == "LIST" || verb == "TICK") {
    if (argc != 0) reject(fmt::format("{} takes no arguments", verb));
    req.verb = verb == "LIST" ? Verb::list : Verb::tick;
  } else if (verb == "GET") {
    if (argc != 1) reject("GET takes one name");
    req.verb = Verb::get;
    req.names.push_back(require_name(f[1]));
  } else if (verb == "MGET") {
    if (argc < 1 || argc > kMaxBatch) reject("MGET takes 1..1000 names");
    req.verb = Verb::mget;
    for (std::size_t i = 1; i < f.size(); ++i) req.names.push_back(require_name(f[i]));
  } else if (verb == "SET") {
    if (argc != 2) reject("SET takes a name and a value");
    req.verb = Verb::set;
    req.assignments.push_back(make_assignment(f[1], f[2]));
  } else if (verb == "MSET") {
    if (argc < 1 || argc > kMaxBatch) reject("MSET takes 1..1000 pairs");
    req.verb = Verb::mset;
    for (std::size_t i = 1; i < f.size(); ++i) {
      const auto eq = f[i].find('=');
      if (eq == std::string_view::npos) reject(fmt::format("expected name=value, got '{}'", f[i]));
      req.assignments.push_back(make_assignment(f[i].substr(0, eq), f[i].substr(eq + 1)));
    }
  } else if (verb == "MODE") {
    if (argc != 1) reject("MODE takes rt|lockstep");
    auto mode = plant::parse_clock_mode(f[1]);
    if (!mode) reject(fmt::format("unknown mode '{}'", f[1]));
    req.verb = Verb::mode;
    req.mode = *mode;
  } else if (verb == "ADVANCE") {
    if (argc != 1) reject("ADVANCE takes a duration in ms");
    auto ms = parse_count(f[1]);
    if (!ms) reject(fmt::format("bad duration '{}'", f[1]));
    req.verb = Verb::advance;
    req.advance_ms = *ms;
  } else {
    reject(fmt::format("unknown verb '{}'", verb));
  }
  return req;
}

std::string format_request(const MirrorRequest& r) {
  std::string out;
  switch (r.verb) {
    case Verb::list: return "LIST";
    case Verb::tick: return "TICK";
    case Verb::get: return "GET " + r.names.at(0);
    case Verb::mget:
      out = "MGET";
      for (const auto& n : r.names) out += ' ' + n;
      return out;
    case Verb::set: {
      const Assignment& a = r.assignments.at(0);
      return fmt::format("SET {} {}", a.name, a.literal.empty() ? format_number(a.value) : a.literal);
    }
    case Verb::mset:
      out = "MSET";
      for (const auto& a : r.assignments) {
        out += fmt::format(" {}={}", a.name, a.literal.empty() ? format_number(a.value) : a.literal);
      }
      return out;
    case Verb::mode: return fmt::format("MODE {}", plant::to_string(r.mode));
    case Verb::advance: return fmt::format("ADVANCE {}", r.advance_ms);
  }
  return out;
}

std::string format_ok(std::span<const double> values) {
  std::string out = "OK";
  for (double v : values) {
    out += ' ';
    out += format_number(v);
  }
  return out;
}

std::string format_error(int code, std::string_view detail) { return fmt::format("ERR {} {}", code, detail); }

MirrorResponse parse_response(std::string_view line) {
  MirrorResponse r;
  if (line == "OK" || line.starts_with("OK ")) {
    r.ok = true;
    std::size_t pos = 2;
    while (pos < line.size()) {
      ++pos;  // space
      const auto sp = line.find(' ', pos);
      const auto tok = line.substr(pos, sp == std::string_view::npos ? std::string_view::npos : sp - pos);
      auto v = parse_decimal(tok);
      if (!v) throw Error(ErrorCode::io, fmt::format("malformed value '{}' in response", tok));
      r.values.push_back(*v);
      if (sp == std::string_view::npos) break;
      pos = sp;
    }
    return r;
  }
  if (line.starts_with("ERR ")) {
    const auto rest = line.substr(4);
    const auto sp = rest.find(' ');
    const auto code = parse_count(rest.substr(0, sp));
    if (!code) throw Error(ErrorCode::io, fmt::format("malformed error response '{}'", line));
    r.code = static_cast<int>(*code);
    if (sp != std::string_view::npos) r.detail = std::string(rest.substr(sp + 1));
    return r;
  }
  throw Error(ErrorCode::io, fmt::format("malformed response '{}'", line));
}

}  // namespace npptwin::mirror
