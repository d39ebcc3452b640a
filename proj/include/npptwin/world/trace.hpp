#pragma once

#include "npptwin/world/map.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

namespace npptwin::world {

struct TraceRecord {
  std::int64_t t_ms = 0;
  std::string robot_id;
  double x_m = 0.0;
  double y_m = 0.0;
  double z_m = 0.0;
  double yaw_deg = 0.0;

  bool operator==(const TraceRecord&) const = default;
};

inline constexpr const char* kTraceCsvHeader = "t_ms,robot_id,x_m,y_m,z_m,yaw_deg";

// One CSV row (no newline); meters and degrees with 3 decimals.
std::string trace_csv_row(const TraceRecord& r);

// Append-only per-robot log. Copies share sealed chunks, so snapshotting a
// long log is cheap and never races with later appends.
class TraceLog {
public:
  static constexpr std::size_t kChunk = 256;

  void append(TraceRecord record);
  void clear();
  std::size_t size() const { return sealed_count_ + open_.size(); }
  bool empty() const { return size() == 0; }
  const TraceRecord& back() const;

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (const auto& chunk : sealed_) {
      for (const auto& r : *chunk) fn(r);
    }
    for (const auto& r : open_) fn(r);
  }

  std::vector<TraceRecord> records() const;
  // Header plus one LF-terminated row per record.
  std::string to_csv() const;

private:
  std::vector<std::shared_ptr<const std::vector<TraceRecord>>> sealed_;
  std::size_t sealed_count_ = 0;
  std::vector<TraceRecord> open_;
};

// Streams trace rows to a CSV file. A write failure disables the sink and
// the owner is expected to surface the warning.
class TraceCsvSink {
public:
  explicit TraceCsvSink(const std::filesystem::path& path);

  bool write(const TraceRecord& record);
  // Rewrite the file with just the header (episode reset).
  bool truncate();
  bool healthy() const { return healthy_; }
  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
  std::ofstream out_;
  bool healthy_ = true;
};

}  // namespace npptwin::world
