#include "npptwin/render/recorder.hpp"

#include "npptwin/error.hpp"

#include <fmt/format.h>
#include <fstream>

namespace npptwin::render {

TopdownRecorder::TopdownRecorder(std::filesystem::path directory, std::int64_t interval_ms, std::int64_t start_ms,
                                 RenderMode mode, int px_per_cell)
    : dir_(std::move(directory)), interval_ms_(interval_ms), next_due_ms_(start_ms + interval_ms), mode_(mode),
      ppc_(px_per_cell) {
  if (interval_ms < 1) throw Error(ErrorCode::config, "recorder interval must be >= 1 ms");
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) error_ = fmt::format("cannot create {}: {}", dir_.string(), ec.message());
}

std::string TopdownRecorder::file_name(std::uint64_t seq, std::int64_t t_ms) {
  return fmt::format("topdown_{:05d}_{}.ppm", seq, t_ms);
}

std::vector<std::filesystem::path> TopdownRecorder::on_tick(const SceneView& scene, std::int64_t t_ms) {
  std::vector<std::filesystem::path> written;
  if (error_ || t_ms < next_due_ms_) return written;
  // One frame per tick even if several intervals elapsed; the schedule keeps
  // its phase so later frames stay on interval boundaries.
  while (next_due_ms_ <= t_ms) next_due_ms_ += interval_ms_;

  const std::string bytes = encode_ppm(render_topdown(scene, mode_, ppc_));
  const auto path = dir_ / file_name(seq_, t_ms);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) {
    error_ = fmt::format("failed to write {}", path.string());
    return written;
  }
  ++seq_;
  written.push_back(path);
  return written;
}

}  // namespace npptwin::render
