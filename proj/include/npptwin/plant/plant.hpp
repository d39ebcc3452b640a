#pragma once

#include "npptwin/plant/model.hpp"
#include "npptwin/plant/registry.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace npptwin::plant {

// Immutable view of the plant taken at a step boundary.
struct PlantSnapshot {
  PlantState state;
  DerivedOutputs derived;
  std::vector<double> values;  // registry order
};

// Thread-safe plant. A single writer (the integration loop) advances state;
// readers see the snapshot published at the last step boundary. Writes land
// in the inputs between steps and republish the snapshot at the same clock.
class Plant {
public:
  explicit Plant(PlantParams params = {}, PlantState initial = cold_start_state());

  std::shared_ptr<const PlantSnapshot> snapshot() const;

  double read_var(std::string_view name) const;
  // Values for all names from one snapshot. Throws on the first unknown name.
  std::vector<double> read_vars(std::span<const std::string> names) const;

  double write_var(std::string_view name, double value);
  // All-or-nothing: every name is validated before any write is applied.
  std::vector<double> write_vars(std::span<const std::pair<std::string, double>> writes);

  void step(std::int64_t dt_ms);
  std::int64_t sim_time_ms() const;

  const PlantParams& params() const { return params_; }

private:
  void publish_locked();

  PlantParams params_;
  mutable std::mutex mutex_;
  PlantState state_;
  std::shared_ptr<const PlantSnapshot> snapshot_;
};

enum class ClockMode { realtime, lockstep };

std::string_view to_string(ClockMode mode);
std::optional<ClockMode> parse_clock_mode(std::string_view text);

// Drives a Plant either on the wall clock (one step per tick) or only on
// explicit advance requests.
class PlantRunner {
public:
  PlantRunner(Plant& plant, std::int64_t tick_ms, ClockMode mode);
  ~PlantRunner();

  PlantRunner(const PlantRunner&) = delete;
  PlantRunner& operator=(const PlantRunner&) = delete;

  void start();
  void stop();

  void set_mode(ClockMode mode);
  ClockMode mode() const { return mode_.load(); }

  // Lockstep only: integrate `ms` of simulated time in tick-sized steps (the
  // last one may be shorter). Throws Error(conflict) in realtime mode.
  std::int64_t advance(std::int64_t ms);

  std::int64_t tick_ms() const { return tick_ms_; }

private:
  void run();

  Plant& plant_;
  std::int64_t tick_ms_;
  std::atomic<ClockMode> mode_;
  std::mutex advance_mutex_;
  std::mutex wake_mutex_;
  std::condition_variable wake_;
  bool stopping_ = false;
  std::thread thread_;
};

}  // namespace npptwin::plant
