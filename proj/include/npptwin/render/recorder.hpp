#pragma once

#include "npptwin/render/render.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace npptwin::render {

// Writes a top-down frame every `interval_ms` of simulated time as
// topdown_<seq:05>_<t_ms>.ppm. Sequence numbers are gapless; the first
// frame is due one interval after `start_ms`.
class TopdownRecorder {
public:
  TopdownRecorder(std::filesystem::path directory, std::int64_t interval_ms = 1000, std::int64_t start_ms = 0,
                  RenderMode mode = RenderMode::lit, int px_per_cell = 4);

  // Call once per completed tick. Returns the files written this call. After
  // a write failure the recorder stops and error() reports why.
  std::vector<std::filesystem::path> on_tick(const SceneView& scene, std::int64_t t_ms);

  bool running() const { return !error_; }
  const std::optional<std::string>& error() const { return error_; }
  std::uint64_t frames_written() const { return seq_; }

  static std::string file_name(std::uint64_t seq, std::int64_t t_ms);

private:
  std::filesystem::path dir_;
  std::int64_t interval_ms_;
  std::int64_t next_due_ms_;
  RenderMode mode_;
  int ppc_;
  std::uint64_t seq_ = 0;
  std::optional<std::string> error_;
};

}  // namespace npptwin::render
