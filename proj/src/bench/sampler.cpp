#include "npptwin/bench/sampler.hpp"

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace npptwin::bench {

std::optional<ProcReading> read_proc(pid_t pid) {
  const std::string base = "/proc/" + std::to_string(pid);
  std::ifstream stat(base + "/stat");
  std::string line;
  if (!stat || !std::getline(stat, line)) return std::nullopt;
  // The command name may contain spaces; fields resume after the last ')'.
  const auto close = line.rfind(')');
  if (close == std::string::npos) return std::nullopt;
  std::istringstream rest(line.substr(close + 2));
  std::vector<std::string> f;
  for (std::string tok; rest >> tok;) f.push_back(tok);
  // f[0] is field 3 (state); utime and stime are fields 14 and 15.
  if (f.size() < 13) return std::nullopt;
  std::ifstream statm(base + "/statm");
  std::uint64_t size = 0, resident = 0;
  if (!(statm >> size >> resident)) return std::nullopt;
  ProcReading r;
  r.cpu_ticks = std::stoull(f[11]) + std::stoull(f[12]);
  r.rss_bytes = resident * static_cast<std::uint64_t>(sysconf(_SC_PAGESIZE));
  return r;
}

bool proc_sampling_supported() { return read_proc(getpid()).has_value(); }

ResourceSummary summarize(const std::vector<ResourceSample>& samples) {
  ResourceSummary s;
  for (const auto& x : samples) {
    ++s.samples;
    s.rss_mean_bytes += x.rss_bytes;
    s.cpu_mean_pct += x.cpu_pct;
    s.rss_max_bytes = std::max(s.rss_max_bytes, x.rss_bytes);
    s.cpu_max_pct = std::max(s.cpu_max_pct, x.cpu_pct);
  }
  if (s.samples > 0) {
    s.rss_mean_bytes /= s.samples;
    s.cpu_mean_pct /= s.samples;
  }
  return s;
}

ResourceSampler::ResourceSampler(std::map<std::string, pid_t> processes, std::chrono::milliseconds period)
    : processes_(std::move(processes)), period_(period) {}

ResourceSampler::~ResourceSampler() {
  if (thread_.joinable()) stop();
}

void ResourceSampler::set_label(std::string label) {
  std::lock_guard lock(mutex_);
  label_ = std::move(label);
}

std::uint64_t ResourceSampler::instants() const {
  std::lock_guard lock(mutex_);
  return instants_;
}

void ResourceSampler::start() {
  stopping_ = false;
  thread_ = std::thread([this] { run(); });
}

std::vector<ResourceSample> ResourceSampler::stop() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
  std::lock_guard lock(mutex_);
  return samples_;
}

void ResourceSampler::run() {
  const double hz = static_cast<double>(sysconf(_SC_CLK_TCK));
  std::map<std::string, ProcReading> last;
  auto last_time = std::chrono::steady_clock::now();
  for (const auto& [name, pid] : processes_) {
    if (auto r = read_proc(pid)) last[name] = *r;
  }
  auto next = last_time + period_;
  std::unique_lock lock(mutex_);
  while (!cv_.wait_until(lock, next, [this] { return stopping_; })) {
    const auto now = std::chrono::steady_clock::now();
    const double wall_s = std::chrono::duration<double>(now - last_time).count();
    for (const auto& [name, pid] : processes_) {
      auto r = read_proc(pid);
      if (!r) continue;
      ResourceSample s;
      s.instant = instants_;
      s.label = label_;
      s.process = name;
      s.rss_bytes = static_cast<double>(r->rss_bytes);
      if (auto it = last.find(name); it != last.end() && wall_s > 0) {
        s.cpu_pct = 100.0 * static_cast<double>(r->cpu_ticks - it->second.cpu_ticks) / hz / wall_s;
      }
      last[name] = *r;
      samples_.push_back(std::move(s));
    }
    ++instants_;
    last_time = now;
    next += period_;
  }
}

}  // namespace npptwin::bench
