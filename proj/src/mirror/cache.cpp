#include "npptwin/mirror/cache.hpp"

#include "npptwin/error.hpp"

#include <algorithm>
#include <spdlog/spdlog.h>

namespace npptwin::mirror {

std::optional<double> CacheGeneration::value(const std::string& name) const {
  auto it = values.find(name);
  if (it == values.end()) return std::nullopt;
  return it->second;
}

std::shared_ptr<const CacheGeneration> MirrorCache::current() const {
  std::lock_guard lock(mutex_);
  return current_;
}

void MirrorCache::publish(std::shared_ptr<const CacheGeneration> generation) {
  std::lock_guard lock(mutex_);
  current_ = std::move(generation);
}

void MirrorCache::enqueue_write(std::string name, double value) {
  std::lock_guard lock(mutex_);
  writes_.emplace_back(std::move(name), value);
}

std::vector<std::pair<std::string, double>> MirrorCache::take_writes() {
  std::lock_guard lock(mutex_);
  std::vector<std::pair<std::string, double>> out(writes_.begin(), writes_.end());
  writes_.clear();
  return out;
}

void MirrorCache::requeue_front(std::vector<std::pair<std::string, double>> writes) {
  std::lock_guard lock(mutex_);
  writes_.insert(writes_.begin(), writes.begin(), writes.end());
}

std::size_t MirrorCache::pending_writes() const {
  std::lock_guard lock(mutex_);
  return writes_.size();
}

std::int64_t MirrorCache::staleness_ms(SteadyClock::time_point now) const {
  const auto gen = current();
  if (gen->generation == 0) return 0;
  return std::max<std::int64_t>(0, std::chrono::duration_cast<std::chrono::milliseconds>(now - gen->sampled_at).count());
}

MirrorPoller::MirrorPoller(PollerConfig config, MirrorCache& cache) : config_(std::move(config)), cache_(cache) {}

MirrorPoller::~MirrorPoller() { stop(); }

std::vector<plant::VariableDescriptor> MirrorPoller::registry() const {
  std::lock_guard lock(mutex_);
  return registry_;
}

std::chrono::milliseconds MirrorPoller::current_backoff() const {
  std::lock_guard lock(mutex_);
  return backoff_;
}

void MirrorPoller::drop_connection_locked() {
  client_.reset();
  cache_.set_stale(true);
  failures_.fetch_add(1);
  backoff_ = backoff_.count() == 0 ? config_.min_backoff : std::min(backoff_ * 2, config_.max_backoff);
  next_attempt_ = SteadyClock::now() + backoff_;
}

bool MirrorPoller::ensure_connected_locked() {
  if (client_) return true;
  if (SteadyClock::now() < next_attempt_) return false;
  try {
    auto client = std::make_unique<MirrorClient>(config_.endpoint, config_.io_timeout);
    registry_ = client->list();
    if (config_.names.empty()) {
      names_.clear();
      for (const auto& v : registry_) names_.push_back(v.name);
    } else {
      names_ = config_.names;
    }
    if (std::find(names_.begin(), names_.end(), "sim_time_ms") == names_.end()) names_.push_back("sim_time_ms");
    client_ = std::move(client);
    return true;
  } catch (const Error& e) {
    spdlog::debug("mirror connect to {} failed: {}", config_.endpoint.to_string(), e.what());
    drop_connection_locked();
    return false;
  }
}

bool MirrorPoller::set_mode(plant::ClockMode mode) {
  std::lock_guard lock(mutex_);
  if (!ensure_connected_locked()) return false;
  try {
    client_->mode(mode);
    return true;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::io) drop_connection_locked();
    return false;
  }
}

bool MirrorPoller::sync_once(std::int64_t advance_ms) {
  std::lock_guard lock(mutex_);
  if (!ensure_connected_locked()) return false;

  auto writes = cache_.take_writes();
  try {
    if (!writes.empty()) {
      try {
        client_->mset(writes);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::io) throw;
        spdlog::warn("mirror rejected write batch: {}", e.what());
      }
      writes.clear();
    }
    if (advance_ms > 0) client_->advance(advance_ms);
    const auto values = client_->mget(names_);
    client_->tick();

    auto gen = std::make_shared<CacheGeneration>();
    gen->generation = ++generation_;
    gen->sampled_at = SteadyClock::now();
    gen->values.reserve(names_.size());
    for (std::size_t i = 0; i < names_.size(); ++i) gen->values.emplace(names_[i], values[i]);
    gen->sim_time_ms = static_cast<std::int64_t>(gen->values.at("sim_time_ms"));
    cache_.publish(std::move(gen));
    cache_.set_stale(false);
    backoff_ = std::chrono::milliseconds(0);
    return true;
  } catch (const Error& e) {
    spdlog::debug("mirror poll failed: {}", e.what());
    if (!writes.empty()) cache_.requeue_front(std::move(writes));
    drop_connection_locked();
    return false;
  }
}

void MirrorPoller::start() {
  if (thread_.joinable()) return;
  {
    std::lock_guard lock(wake_mutex_);
    stopping_ = false;
  }
  thread_ = std::thread([this] {
    auto next = SteadyClock::now();
    std::unique_lock lock(wake_mutex_);
    while (!stopping_) {
      lock.unlock();
      sync_once();
      lock.lock();
      next += config_.period;
      const auto now = SteadyClock::now();
      if (next < now) next = now;
      wake_.wait_until(lock, next, [&] { return stopping_; });
    }
  });
}

void MirrorPoller::stop() {
  {
    std::lock_guard lock(wake_mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  if (thread_.joinable()) thread_.join();
}

}  // namespace npptwin::mirror
