#pragma once

#include "npptwin/mirror/cache.hpp"
#include "npptwin/render/image.hpp"
#include "npptwin/world/world.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace npptwin::render {

enum class RenderMode { lit, thermal };

std::string_view to_string(RenderMode mode);
std::optional<RenderMode> parse_render_mode(std::string_view text);

inline constexpr Rgb kNoTemperature{0, 255, 0};
inline constexpr Rgb kFloorLit{64, 64, 64};     // 25% gray
inline constexpr Rgb kCeilingLit{31, 31, 31};   // 12% gray
inline constexpr Rgb kHeadingTick{255, 255, 255};
inline constexpr int kDefaultViewWidth = 256;
inline constexpr int kDefaultViewHeight = 144;
inline constexpr double kFieldOfView_deg = 90.0;

// Blue (-100 °C) to red (+100 °C), clamped; green when there is no
// temperature.
Rgb thermal_color(std::optional<double> celsius);

// Everything a render needs: one world snapshot and the plant sample that
// goes with it.
struct SceneView {
  const world::World& world;
  const mirror::CacheGeneration& plant;
  bool plant_stale = false;
};

struct RayHit {
  double distance = 0.0;  // along the unit ray, in meters
  int col = -1;           // hit cell; outside the grid when the ray left the map
  int row = -1;
  bool inside_map = false;
  bool vertical_side = false;  // crossed an x-boundary last
};

// Grid DDA from (x, y) along the unit direction (dx, dy) to the first WALL
// cell or the map edge.
RayHit cast_ray(const world::WorldMap& map, double x_m, double y_m, double dx, double dy);

struct ColumnSample {
  RayHit hit;
  int wall_height = 0;  // pixels
};

// Per-column geometry of the first-person view (mode independent).
std::vector<ColumnSample> first_person_columns(const world::WorldMap& map, const world::Pose& pose, int width,
                                               int height);

// Throws Error(not_found) for an unknown robot, Error(config) for zero
// dimensions.
Image render_first_person(const SceneView& scene, const std::string& robot_id, RenderMode mode, int width,
                          int height);

// Pixel holding a metric position at the given scale.
std::pair<int, int> topdown_pixel(const world::WorldMap& map, double x_m, double y_m, int px_per_cell);

Image render_topdown(const SceneView& scene, RenderMode mode, int px_per_cell = 4);

}  // namespace npptwin::render
