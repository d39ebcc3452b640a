#pragma once

#include "npptwin/env/env.hpp"
#include "npptwin/mirror/cache.hpp"
#include "npptwin/net/tcp_server.hpp"
#include "npptwin/plant/plant.hpp"
#include "npptwin/render/recorder.hpp"
#include "npptwin/twin/command.hpp"
#include "npptwin/world/world.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

namespace npptwin::twin {

class Gateway;

using world::SessionId;

enum class Transport { tcp, websocket };

struct TwinConfig {
  std::string host = "127.0.0.1";
  std::uint16_t bridge_port = 9000;
  std::optional<std::uint16_t> http_port = 8080;  // nullopt: no browser gateway
  std::optional<net::Endpoint> plant_addr = net::Endpoint{"127.0.0.1", 9100};
  std::filesystem::path map_path;  // empty: bundled default map
  std::int64_t tick_ms = 50;
  plant::ClockMode mode = plant::ClockMode::realtime;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> record_dir;
  std::int64_t topdown_interval_ms = 1000;
  int swarm_size = 0;
  std::string swarm_zone = "turbine_hall";
  std::chrono::milliseconds poll_period{100};
  std::chrono::milliseconds event_period{100};
  env::EnvConfig env_defaults;  // robot_id is filled per robot
  std::optional<std::filesystem::path> web_root;
};

// Published state of one completed tick. Immutable once published.
struct TwinSnapshot {
  world::World world;
  std::shared_ptr<const mirror::CacheGeneration> plant;
  bool plant_stale = true;
  std::int64_t t_ms = 0;
  std::uint64_t tick = 0;

  render::SceneView scene() const { return {world, *plant, plant_stale}; }
};

struct Reply {
  bool ok = false;
  std::string text;                    // "ok ..." or "error <code> <detail>"
  std::optional<render::Image> image;  // sent as PPM after the text on the framed transport

  // Framed-transport body: text, then PPM bytes when there is an image.
  std::string bridge_body() const;
  // Text after the leading status word ("ok" / "error").
  std::string detail() const;
};

Reply error_reply(int code, std::string_view detail);

// The twin process: world + renderer + mirror polling + tick loop, with the
// framed bridge protocol on TCP and (optionally) the browser gateway.
class TwinServer {
public:
  explicit TwinServer(TwinConfig config);
  ~TwinServer();

  TwinServer(const TwinServer&) = delete;
  TwinServer& operator=(const TwinServer&) = delete;

  void start();
  void stop();

  std::uint16_t bridge_port() const;
  std::optional<std::uint16_t> http_port() const;
  const TwinConfig& config() const { return config_; }

  SessionId open_session(Transport transport);
  // Releases the session's robot (enqueued on the tick loop).
  void close_session(SessionId session);
  bool events_enabled(SessionId session) const;

  // Run one command body for a session. Thread-safe; blocks until the reply
  // is ready (mutating commands wait for the tick loop).
  Reply execute(SessionId session, std::string_view body);
  Reply execute(SessionId session, const Command& command);

  std::shared_ptr<const TwinSnapshot> snapshot() const;
  std::vector<std::string> swarm_ids() const { return swarm_ids_; }

  mirror::MirrorCache& mirror_cache() { return cache_; }

private:
  struct TickReply {
    Reply reply;
    std::shared_ptr<const TwinSnapshot> snapshot;
    std::optional<env::EnvConfig> observe;  // render this robot's observation after publish
  };

  struct Pending {
    SessionId session = 0;
    std::optional<Command> command;  // nullopt: release the session's robot
    std::promise<TickReply> done;
    TickReply result;
  };

  struct SessionInfo {
    Transport transport = Transport::tcp;
    bool events = false;
  };

  Reply answer_from_snapshot(SessionId session, const Command& command);
  Reply plant_set(const Command& command);

  void tick_loop_realtime();
  void tick_loop_lockstep();
  // Applies one mutating command on the tick thread. Returns true when the
  // command already ran ticks (lockstep step/advance).
  bool apply(Pending& pending);
  void run_tick();
  void publish();
  env::Episode& episode_for(const std::string& robot_id);
  void sync_trace_sinks(const std::vector<world::TraceRecord>& added);
  void serve_bridge(net::Socket& socket);

  TwinConfig config_;
  std::shared_ptr<const world::WorldMap> map_;

  // Tick-thread state.
  world::World world_;
  std::map<std::string, env::Episode> episodes_;
  std::map<std::string, world::TraceCsvSink> trace_sinks_;
  std::optional<render::TopdownRecorder> recorder_;
  std::shared_ptr<const mirror::CacheGeneration> plant_gen_;
  std::uint64_t tick_count_ = 0;

  mirror::MirrorCache cache_;
  std::unique_ptr<mirror::MirrorPoller> poller_;
  std::vector<plant::VariableDescriptor> plant_registry_;
  mutable std::mutex registry_mutex_;

  mutable std::mutex snapshot_mutex_;
  std::shared_ptr<const TwinSnapshot> snapshot_;

  std::mutex queue_mutex_;
  std::condition_variable queue_cv_;
  std::deque<std::shared_ptr<Pending>> queue_;
  bool stopping_ = false;
  std::thread tick_thread_;

  mutable std::mutex sessions_mutex_;
  std::map<SessionId, SessionInfo> sessions_;
  std::atomic<SessionId> next_session_{1};

  std::vector<std::string> swarm_ids_;
  std::unique_ptr<net::TcpServer> bridge_;
  std::unique_ptr<Gateway> gateway_;
  bool started_ = false;
};

}  // namespace npptwin::twin
