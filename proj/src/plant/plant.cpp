#include "npptwin/plant/plant.hpp"

#include "npptwin/error.hpp"

#include <chrono>
#include <cmath>
#include <spdlog/spdlog.h>

namespace npptwin::plant {

namespace {

std::size_t require_variable(std::string_view name) {
  auto idx = find_variable(name);
  if (!idx) throw Error(ErrorCode::not_found, std::string(name));
  return *idx;
}

std::size_t require_writable(std::string_view name, double value) {
  const std::size_t idx = require_variable(name);
  if (registry()[idx].access != Access::read_write) throw Error(ErrorCode::forbidden, std::string(name));
  if (!std::isfinite(value)) throw Error(ErrorCode::bad_request, "non-finite value for " + std::string(name));
  return idx;
}

}  // namespace

Plant::Plant(PlantParams params, PlantState initial) : params_(params), state_(initial) {
  params_.validate();
  clamp_to_ranges(state_);
  std::lock_guard lock(mutex_);
  publish_locked();
}

void Plant::publish_locked() {
  auto snap = std::make_shared<PlantSnapshot>();
  snap->state = state_;
  snap->derived = derived_outputs(state_, params_);
  snap->values.reserve(registry().size());
  for (std::size_t i = 0; i < registry().size(); ++i) {
    snap->values.push_back(evaluate(i, state_, snap->derived));
  }
  snapshot_ = std::move(snap);
}

std::shared_ptr<const PlantSnapshot> Plant::snapshot() const {
  std::lock_guard lock(mutex_);
  return snapshot_;
}

double Plant::read_var(std::string_view name) const {
  const std::size_t idx = require_variable(name);
  return snapshot()->values[idx];
}

std::vector<double> Plant::read_vars(std::span<const std::string> names) const {
  std::vector<std::size_t> idx;
  idx.reserve(names.size());
  for (const auto& n : names) idx.push_back(require_variable(n));
  const auto snap = snapshot();
  std::vector<double> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(snap->values[i]);
  return out;
}

double Plant::write_var(std::string_view name, double value) {
  const std::size_t idx = require_writable(name, value);
  std::lock_guard lock(mutex_);
  const double applied = apply_input(idx, state_.inputs, value);
  publish_locked();
  return applied;
}

std::vector<double> Plant::write_vars(std::span<const std::pair<std::string, double>> writes) {
  std::vector<std::size_t> idx;
  idx.reserve(writes.size());
  for (const auto& [name, value] : writes) idx.push_back(require_writable(name, value));
  std::vector<double> applied;
  applied.reserve(writes.size());
  std::lock_guard lock(mutex_);
  for (std::size_t i = 0; i < writes.size(); ++i) {
    applied.push_back(apply_input(idx[i], state_.inputs, writes[i].second));
  }
  publish_locked();
  return applied;
}

void Plant::step(std::int64_t dt_ms) {
  std::lock_guard lock(mutex_);
  state_ = step_plant(state_, dt_ms, params_);
  publish_locked();
}

std::int64_t Plant::sim_time_ms() const { return snapshot()->state.sim_time_ms; }

std::string_view to_string(ClockMode mode) { return mode == ClockMode::realtime ? "rt" : "lockstep"; }

std::optional<ClockMode> parse_clock_mode(std::string_view text) {
  if (text == "rt") return ClockMode::realtime;
  if (text == "lockstep") return ClockMode::lockstep;
  return std::nullopt;
}

PlantRunner::PlantRunner(Plant& plant, std::int64_t tick_ms, ClockMode mode)
    : plant_(plant), tick_ms_(tick_ms), mode_(mode) {
  if (tick_ms < 1 || tick_ms > 1000) {
    throw Error(ErrorCode::config, "tick_ms must be in [1, 1000]");
  }
}

PlantRunner::~PlantRunner() { stop(); }

void PlantRunner::start() {
  if (thread_.joinable()) return;
  {
    std::lock_guard lock(wake_mutex_);
    stopping_ = false;
  }
  thread_ = std::thread([this] { run(); });
}

void PlantRunner::stop() {
  {
    std::lock_guard lock(wake_mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  if (thread_.joinable()) thread_.join();
}

void PlantRunner::set_mode(ClockMode mode) {
  mode_.store(mode);
  wake_.notify_all();
}

std::int64_t PlantRunner::advance(std::int64_t ms) {
  if (mode_.load() != ClockMode::lockstep) throw Error(ErrorCode::conflict, "mode");
  if (ms < 0) throw Error(ErrorCode::bad_request, "negative advance");
  std::lock_guard lock(advance_mutex_);
  while (ms > 0) {
    const std::int64_t dt = std::min(ms, tick_ms_);
    plant_.step(dt);
    ms -= dt;
  }
  return plant_.sim_time_ms();
}

void PlantRunner::run() {
  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::milliseconds(tick_ms_);
  auto next = clock::now() + period;
  std::unique_lock lock(wake_mutex_);
  while (!stopping_) {
    if (mode_.load() != ClockMode::realtime) {
      wake_.wait(lock, [&] { return stopping_ || mode_.load() == ClockMode::realtime; });
      next = clock::now() + period;
      continue;
    }
    if (wake_.wait_until(lock, next, [&] { return stopping_; })) break;
    lock.unlock();
    {
      std::lock_guard step_lock(advance_mutex_);
      if (mode_.load() == ClockMode::realtime) plant_.step(tick_ms_);
    }
    next += period;
    const auto now = clock::now();
    if (now > next + period) {
      spdlog::warn("plant tick overrun by {} ms", std::chrono::duration_cast<std::chrono::milliseconds>(now - next).count());
      next = now;
    }
    lock.lock();
  }
}

}  // namespace npptwin::plant
