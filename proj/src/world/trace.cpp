#include "npptwin/world/trace.hpp"

#include <cmath>
#include <fmt/format.h>

namespace npptwin::world {

namespace {

std::string fixed3(double v) {
  double r = std::round(v * 1000.0) / 1000.0;
  if (r == 0.0) r = 0.0;  // no "-0.000"
  return fmt::format("{:.3f}", r);
}

}  // namespace

std::string trace_csv_row(const TraceRecord& r) {
  return fmt::format("{},{},{},{},{},{}", r.t_ms, r.robot_id, fixed3(r.x_m), fixed3(r.y_m), fixed3(r.z_m),
                     fixed3(r.yaw_deg));
}

void TraceLog::append(TraceRecord record) {
  open_.push_back(std::move(record));
  if (open_.size() == kChunk) {
    sealed_count_ += open_.size();
    sealed_.push_back(std::make_shared<const std::vector<TraceRecord>>(std::move(open_)));
    open_ = {};
    open_.reserve(kChunk);
  }
}

void TraceLog::clear() {
  sealed_.clear();
  sealed_count_ = 0;
  open_.clear();
}

const TraceRecord& TraceLog::back() const { return open_.empty() ? sealed_.back()->back() : open_.back(); }

std::vector<TraceRecord> TraceLog::records() const {
  std::vector<TraceRecord> out;
  out.reserve(size());
  for_each([&](const TraceRecord& r) { out.push_back(r); });
  return out;
}

std::string TraceLog::to_csv() const {
  std::string out = kTraceCsvHeader;
  out += '\n';
  for_each([&](const TraceRecord& r) {
    out += trace_csv_row(r);
    out += '\n';
  });
  return out;
}

TraceCsvSink::TraceCsvSink(const std::filesystem::path& path) : path_(path) { truncate(); }

bool TraceCsvSink::truncate() {
  if (out_.is_open()) out_.close();
  out_.open(path_, std::ios::out | std::ios::trunc | std::ios::binary);
  out_ << kTraceCsvHeader << '\n';
  out_.flush();
  healthy_ = static_cast<bool>(out_);
  return healthy_;
}

bool TraceCsvSink::write(const TraceRecord& record) {
  if (!healthy_) return false;
  out_ << trace_csv_row(record) << '\n';
  out_.flush();
  healthy_ = static_cast<bool>(out_);
  return healthy_;
}

}  // namespace npptwin::world
