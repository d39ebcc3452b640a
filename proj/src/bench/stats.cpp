#include "npptwin/bench/stats.hpp"

#include "npptwin/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace npptwin::bench {

double percentile(std::vector<double> samples, double q) {
  if (samples.empty()) throw Error(ErrorCode::config, "percentile of an empty sample set");
  std::sort(samples.begin(), samples.end());
  const double rank = std::clamp(q, 0.0, 1.0) * static_cast<double>(samples.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = static_cast<std::size_t>(std::ceil(rank));
  return samples[lo] + (samples[hi] - samples[lo]) * (rank - static_cast<double>(lo));
}

Stats summarize(const std::vector<double>& samples) {
  if (samples.empty()) throw Error(ErrorCode::config, "no samples");
  Stats s;
  s.runs = static_cast<int>(samples.size());
  s.mean_ms = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
  s.p50_ms = percentile(samples, 0.50);
  s.p95_ms = percentile(samples, 0.95);
  s.max_ms = *std::max_element(samples.begin(), samples.end());
  return s;
}

void busy_wait(std::chrono::microseconds duration) {
  const auto until = std::chrono::steady_clock::now() + duration;
  while (std::chrono::steady_clock::now() < until) {
  }
}

}  // namespace npptwin::bench
