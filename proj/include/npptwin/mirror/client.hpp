#pragma once

#include "npptwin/mirror/protocol.hpp"
#include "npptwin/net/socket.hpp"
#include "npptwin/plant/registry.hpp"

#include <chrono>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace npptwin::mirror {

// Blocking client for the mirror line protocol. ERR responses are raised as
// Error with the wire code; transport failures as Error(io).
class MirrorClient {
public:
  explicit MirrorClient(const net::Endpoint& endpoint,
                        std::chrono::milliseconds timeout = std::chrono::seconds(10));

  std::string request_line(std::string_view line);

  std::vector<plant::VariableDescriptor> list();
  double get(std::string_view name);
  std::vector<double> mget(std::span<const std::string> names);
  double set(std::string_view name, double value);
  std::vector<double> mset(std::span<const std::pair<std::string, double>> writes);
  std::int64_t tick();
  std::int64_t mode(plant::ClockMode mode);
  std::int64_t advance(std::int64_t ms);

private:
  std::vector<double> expect_ok(std::string_view line);

  net::Socket socket_;
  net::LineReader reader_;
};

}  // namespace npptwin::mirror
