#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace npptwin::net {

// Owning POSIX socket descriptor.
class Socket {
public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket() { close(); }

  Socket(Socket&& other) noexcept : fd_(other.release()) {}
  Socket& operator=(Socket&& other) noexcept {
    if (this != &other) {
      close();
      fd_ = other.release();
    }
    return *this;
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  int release() {
    int fd = fd_;
    fd_ = -1;
    return fd;
  }
  void close();
  // Unblocks any thread waiting in recv/accept on this descriptor.
  void shutdown();

  // Throws Error(io) on failure or peer close.
  void write_all(std::span<const std::uint8_t> bytes);
  void write_all(std::string_view text);
  // Reads exactly out.size() bytes; returns false on clean EOF before the
  // first byte, throws on EOF mid-buffer.
  bool read_exact(std::span<std::uint8_t> out);
  // Returns 0 on EOF.
  std::size_t read_some(std::span<std::uint8_t> out);

  void set_receive_timeout(std::chrono::milliseconds timeout);
  void set_nodelay();

private:
  int fd_ = -1;
};

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  std::string to_string() const;
};

// Parses "host:port". Throws Error(config) when malformed.
Endpoint parse_endpoint(std::string_view text);

Socket connect_tcp(const Endpoint& ep, std::chrono::milliseconds timeout = std::chrono::seconds(5));

// Listening socket bound to host:port. Port 0 picks an ephemeral port.
class Listener {
public:
  Listener(const std::string& host, std::uint16_t port);

  std::uint16_t port() const { return port_; }
  // Returns nullopt once shutdown() has been called.
  std::optional<Socket> accept();
  void shutdown();

private:
  Socket socket_;
  std::uint16_t port_ = 0;
};

// Buffered LF-delimited line reader over a socket.
class LineReader {
public:
  LineReader(Socket& socket, std::size_t max_line) : socket_(socket), max_line_(max_line) {}

  // Next line without its LF. nullopt on EOF. Throws Error(bad_request) when
  // a line exceeds the limit.
  std::optional<std::string> read_line();

private:
  Socket& socket_;
  std::size_t max_line_;
  std::string buffer_;
  std::size_t scan_from_ = 0;
};

}  // namespace npptwin::net
