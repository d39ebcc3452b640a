#pragma once

#include "npptwin/mirror/client.hpp"
#include "npptwin/net/socket.hpp"
#include "npptwin/plant/registry.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

namespace npptwin::mirror {

using SteadyClock = std::chrono::steady_clock;

// One consistent sample of the plant: every value was read from a single
// plant snapshot, so all share sim_time_ms.
struct CacheGeneration {
  std::uint64_t generation = 0;
  std::int64_t sim_time_ms = 0;
  SteadyClock::time_point sampled_at{};
  std::unordered_map<std::string, double> values;

  std::optional<double> value(const std::string& name) const;
};

// Thread-safe holder of the latest generation plus the outbound write queue.
class MirrorCache {
public:
  std::shared_ptr<const CacheGeneration> current() const;
  void publish(std::shared_ptr<const CacheGeneration> generation);

  void enqueue_write(std::string name, double value);
  std::vector<std::pair<std::string, double>> take_writes();
  // Put writes back at the head of the queue after a failed flush.
  void requeue_front(std::vector<std::pair<std::string, double>> writes);
  std::size_t pending_writes() const;

  void set_stale(bool stale) { stale_.store(stale); }
  bool stale() const { return stale_.load(); }
  // Wall time since the current generation was sampled (0 with no sample).
  std::int64_t staleness_ms(SteadyClock::time_point now = SteadyClock::now()) const;

private:
  mutable std::mutex mutex_;
  std::shared_ptr<const CacheGeneration> current_ = std::make_shared<CacheGeneration>();
  std::deque<std::pair<std::string, double>> writes_;
  std::atomic<bool> stale_{true};
};

struct PollerConfig {
  net::Endpoint endpoint;
  std::chrono::milliseconds period{100};
  std::vector<std::string> names;  // empty: every registry variable
  std::chrono::milliseconds min_backoff{100};
  std::chrono::milliseconds max_backoff{5000};
  std::chrono::milliseconds io_timeout{5000};
};

// Keeps a MirrorCache in sync with a mirror server: each cycle flushes
// pending writes with one MSET, then refreshes with one MGET and a TICK.
class MirrorPoller {
public:
  MirrorPoller(PollerConfig config, MirrorCache& cache);
  ~MirrorPoller();

  MirrorPoller(const MirrorPoller&) = delete;
  MirrorPoller& operator=(const MirrorPoller&) = delete;

  // One synchronous cycle. When advance_ms > 0 an ADVANCE is issued between
  // the flush and the refresh (lockstep driving). Returns false on transport
  // failure; the cache is then marked stale and the next attempt is held
  // back by exponential backoff.
  bool sync_once(std::int64_t advance_ms = 0);

  // Runs sync_once every period on a background thread.
  void start();
  void stop();

  // Issue MODE on the current connection (connecting first if needed).
  bool set_mode(plant::ClockMode mode);

  // Registry as reported by the server's LIST; empty before first connect.
  std::vector<plant::VariableDescriptor> registry() const;

  std::uint64_t failures() const { return failures_.load(); }
  std::chrono::milliseconds current_backoff() const;

private:
  bool ensure_connected_locked();
  void drop_connection_locked();

  PollerConfig config_;
  MirrorCache& cache_;

  mutable std::mutex mutex_;
  std::unique_ptr<MirrorClient> client_;
  std::vector<plant::VariableDescriptor> registry_;
  std::vector<std::string> names_;
  std::uint64_t generation_ = 0;
  std::chrono::milliseconds backoff_{0};
  SteadyClock::time_point next_attempt_{};
  std::atomic<std::uint64_t> failures_{0};

  std::mutex wake_mutex_;
  std::condition_variable wake_;
  bool stopping_ = false;
  std::thread thread_;
};

}  // namespace npptwin::mirror
