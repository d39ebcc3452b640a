#pragma once

#include "npptwin/mirror/protocol.hpp"
#include "npptwin/mirror/server.hpp"
#include "npptwin/net/tcp_server.hpp"
#include "npptwin/numeric_text.hpp"
#include "npptwin/plant/model.hpp"
#include "npptwin/plant/plant.hpp"
#include "npptwin/plant/registry.hpp"
#include "npptwin/twin/server.hpp"
#include "npptwin/world/map.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace npptwin::testing {

class TempDir {
public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            fmt::format("npptwin-test-{}-{}", ::getpid(), counter.fetch_add(1));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

inline plant::PlantState nominal_state() { return plant::solve_steady_state(plant::PlantInputs{}); }

// plantd in-process: plant + runner + mirror server on an ephemeral port.
struct PlantService {
  explicit PlantService(plant::ClockMode mode = plant::ClockMode::lockstep,
                        plant::PlantState initial = nominal_state(), std::int64_t tick_ms = 50)
      : plant({}, initial), runner(plant, tick_ms, mode), server(plant, runner, "127.0.0.1", 0) {
    runner.start();
    server.start();
  }
  ~PlantService() {
    server.stop();
    runner.stop();
  }

  net::Endpoint endpoint() const { return {"127.0.0.1", server.port()}; }

  plant::Plant plant;
  plant::PlantRunner runner;
  mirror::MirrorServer server;
};

inline twin::TwinConfig twin_config(std::optional<net::Endpoint> plant_addr,
                                    plant::ClockMode mode = plant::ClockMode::lockstep) {
  twin::TwinConfig cfg;
  cfg.bridge_port = 0;
  cfg.http_port = std::nullopt;
  cfg.plant_addr = std::move(plant_addr);
  cfg.mode = mode;
  cfg.poll_period = std::chrono::milliseconds(20);
  return cfg;
}

// Small map from terrain rows; extra fields merged from `extra`.
inline nlohmann::json map_document(const std::vector<std::string>& rows, nlohmann::json extra = nlohmann::json::object()) {
  nlohmann::json doc{{"name", "test"},
                     {"width", rows.empty() ? 0 : static_cast<int>(rows[0].size())},
                     {"height", static_cast<int>(rows.size())},
                     {"rows", rows},
                     {"target", {{"x", 0.5}, {"y", 0.5}}}};
  for (auto& [k, v] : extra.items()) doc[k] = v;
  return doc;
}

inline std::shared_ptr<const world::WorldMap> make_map(const std::vector<std::string>& rows,
                                                       nlohmann::json extra = nlohmann::json::object()) {
  return std::make_shared<const world::WorldMap>(world::load_map(map_document(rows, std::move(extra)), nullptr));
}

// A scripted stand-in for plantd speaking the mirror grammar over a plain
// value table. No physics: values change only when a test sets them or a
// client writes them.
class FakeMirrorBackend {
public:
  FakeMirrorBackend() : server_("127.0.0.1", 0, [this](net::Socket& s) { serve(s); }) {
    for (const auto& d : plant::registry()) values_[d.name] = (d.min + d.max) / 2;
    values_["sim_time_ms"] = 0;
    server_.start();
  }
  ~FakeMirrorBackend() { server_.stop(); }

  net::Endpoint endpoint() const { return {"127.0.0.1", server_.port()}; }

  void set(const std::string& name, double v) {
    std::lock_guard lock(mutex_);
    values_[name] = v;
  }
  double get(const std::string& name) {
    std::lock_guard lock(mutex_);
    return values_.at(name);
  }
  int requests() const { return requests_.load(); }

private:
  std::string handle(std::string_view line) {
    ++requests_;
    mirror::MirrorRequest req;
    try {
      req = mirror::parse_request(line);
    } catch (const Error& e) {
      return mirror::format_error(400, e.what());
    }
    std::lock_guard lock(mutex_);
    auto clock = [&] { return fmt::format("OK {}", static_cast<std::int64_t>(values_["sim_time_ms"])); };
    switch (req.verb) {
      case mirror::Verb::list: {
        const auto& reg = plant::registry();
        std::string out = fmt::format("OK {}", reg.size());
        for (const auto& d : reg) {
          out += fmt::format("\n{} {} {} {} {}", d.name, d.unit, d.access == plant::Access::read_write ? "rw" : "ro",
                             format_number(d.min), format_number(d.max));
        }
        return out + "\nEND";
      }
      case mirror::Verb::get:
      case mirror::Verb::mget: {
        std::vector<double> out;
        for (const auto& n : req.names) {
          auto it = values_.find(n);
          if (it == values_.end()) return mirror::format_error(404, n);
          out.push_back(it->second);
        }
        return mirror::format_ok(out);
      }
      case mirror::Verb::set:
      case mirror::Verb::mset: {
        std::vector<double> out;
        for (const auto& a : req.assignments) {
          auto idx = plant::find_variable(a.name);
          if (!idx) return mirror::format_error(404, a.name);
          if (plant::registry()[*idx].access != plant::Access::read_write) return mirror::format_error(403, a.name);
        }
        for (const auto& a : req.assignments) {
          values_[a.name] = a.value;
          out.push_back(a.value);
        }
        return mirror::format_ok(out);
      }
      case mirror::Verb::tick:
      case mirror::Verb::mode:
        return clock();
      case mirror::Verb::advance:
        values_["sim_time_ms"] += static_cast<double>(req.advance_ms);
        return clock();
    }
    return mirror::format_error(400, "verb");
  }

  void serve(net::Socket& socket) {
    net::LineReader reader(socket, mirror::kMaxLineBytes);
    while (auto line = reader.read_line()) socket.write_all(handle(*line) + "\n");
  }

  std::mutex mutex_;
  std::map<std::string, double> values_;
  std::atomic<int> requests_{0};
  net::TcpServer server_;
};

template <typename Pred>
bool wait_until(Pred pred, std::chrono::milliseconds timeout = std::chrono::seconds(5)) {
  auto deadline = std::chrono::steady_clock::now() + timeout;
  while (std::chrono::steady_clock::now() < deadline) {
    if (pred()) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  return pred();
}

}  // namespace npptwin::testing
