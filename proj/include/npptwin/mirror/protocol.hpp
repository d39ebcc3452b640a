#pragma once

#include "npptwin/plant/plant.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace npptwin::mirror {

inline constexpr std::size_t kMaxLineBytes = 64 * 1024;
inline constexpr std::size_t kMaxBatch = 1000;

enum class Verb { list, get, mget, set, mset, tick, mode, advance };

struct Assignment {
  std::string name;
  std::string literal;  // decimal text exactly as received
  double value = 0.0;
};

struct MirrorRequest {
  Verb verb = Verb::tick;
  std::vector<std::string> names;        // GET (one), MGET
  std::vector<Assignment> assignments;   // SET (one), MSET
  plant::ClockMode mode = plant::ClockMode::realtime;
  std::int64_t advance_ms = 0;
};

// Parses one request line (without its LF). Throws Error(bad_request).
MirrorRequest parse_request(std::string_view line);

// Canonical request line (without LF). format_request(parse_request(x)) == x
// for every grammatical x.
std::string format_request(const MirrorRequest& request);

std::string format_ok(std::span<const double> values);
std::string format_error(int code, std::string_view detail);

bool is_variable_name(std::string_view name);

// Response line helpers for clients.
struct MirrorResponse {
  bool ok = false;
  int code = 0;
  std::string detail;          // text after the code for ERR
  std::vector<double> values;  // parsed numbers for OK
};

MirrorResponse parse_response(std::string_view line);

}  // namespace npptwin::mirror
