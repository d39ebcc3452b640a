#pragma once

#include <sys/types.h>

#include <chrono>
#include <condition_variable>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace npptwin::bench {

struct ProcReading {
  std::uint64_t rss_bytes = 0;
  std::uint64_t cpu_ticks = 0;  // utime + stime
};

// nullopt when /proc is unavailable or the process is gone.
std::optional<ProcReading> read_proc(pid_t pid);
bool proc_sampling_supported();

struct ResourceSample {
  std::uint64_t instant = 0;  // samples taken together share an instant
  std::string label;   // what the orchestrator was doing
  std::string process;
  double rss_bytes = 0.0;
  double cpu_pct = 0.0;  // 100 = one core
};

struct ResourceSummary {
  int samples = 0;
  double rss_mean_bytes = 0.0;
  double rss_max_bytes = 0.0;
  double cpu_mean_pct = 0.0;
  double cpu_max_pct = 0.0;
};

ResourceSummary summarize(const std::vector<ResourceSample>& samples);

// Samples RSS and CPU% of named processes at a fixed period on its own
// thread, tagging each sample with the current label.
class ResourceSampler {
public:
  ResourceSampler(std::map<std::string, pid_t> processes, std::chrono::milliseconds period);
  ~ResourceSampler();

  void set_label(std::string label);
  // Sampling instants completed so far.
  std::uint64_t instants() const;
  void start();
  // Returns every sample taken.
  std::vector<ResourceSample> stop();

private:
  void run();

  std::map<std::string, pid_t> processes_;
  std::chrono::milliseconds period_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  bool stopping_ = false;
  std::string label_;
  std::vector<ResourceSample> samples_;
  std::uint64_t instants_ = 0;
  std::thread thread_;
};

}  // namespace npptwin::bench
