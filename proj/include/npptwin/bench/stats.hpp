#pragma once

#include <chrono>
#include <vector>

namespace npptwin::bench {

struct Stats {
  int runs = 0;
  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double max_ms = 0.0;
};

// Linear interpolation between closest ranks; q in [0, 1].
double percentile(std::vector<double> samples, double q);
// Throws Error(config) on an empty sample set.
Stats summarize(const std::vector<double>& samples_ms);

template <typename Fn>
double time_ms(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

void busy_wait(std::chrono::microseconds duration);

}  // namespace npptwin::bench
