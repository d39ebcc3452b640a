#pragma once

#include "npptwin/net/tcp_server.hpp"
#include "npptwin/plant/plant.hpp"

#include <memory>
#include <string>
#include <string_view>

namespace npptwin::mirror {

// Executes one request line against the plant and returns the response
// (possibly several lines for LIST, without the final LF).
std::string handle_line(plant::Plant& plant, plant::PlantRunner& runner, std::string_view line);

// Line protocol endpoint in front of a plant.
class MirrorServer {
public:
  MirrorServer(plant::Plant& plant, plant::PlantRunner& runner, std::string host, std::uint16_t port);

  std::uint16_t port() const { return server_.port(); }
  void start() { server_.start(); }
  void stop() { server_.stop(); }

private:
  void serve(net::Socket& socket);

  plant::Plant& plant_;
  plant::PlantRunner& runner_;
  net::TcpServer server_;
};

}  // namespace npptwin::mirror
