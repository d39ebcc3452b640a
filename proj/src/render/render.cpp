#include "npptwin/render/render.hpp"

#include "npptwin/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fmt/format.h>
#include <limits>

namespace npptwin::render {

using world::Terrain;

std::string_view to_string(RenderMode mode) { return mode == RenderMode::lit ? "lit" : "thermal"; }

std::optional<RenderMode> parse_render_mode(std::string_view text) {
  if (text == "lit") return RenderMode::lit;
  if (text == "thermal") return RenderMode::thermal;
  return std::nullopt;
}

Rgb thermal_color(std::optional<double> celsius) {
  if (!celsius || std::isnan(*celsius)) return kNoTemperature;
  const double u = std::clamp((*celsius + 100.0) / 200.0, 0.0, 1.0);
  const auto red = static_cast<std::uint8_t>(std::floor(255.0 * u + 0.5));
  return {red, 0, static_cast<std::uint8_t>(255 - red)};
}

RayHit cast_ray(const world::WorldMap& map, double x, double y, double dx, double dy) {
  const double cs = map.cell_size_m;
  // Work in cell units; convert back at the end.
  const double px = x / cs;
  const double py = y / cs;
  int col = static_cast<int>(std::floor(px));
  int row = static_cast<int>(std::floor(py));

  constexpr double inf = std::numeric_limits<double>::infinity();
  const double delta_x = dx == 0.0 ? inf : std::abs(1.0 / dx);
  const double delta_y = dy == 0.0 ? inf : std::abs(1.0 / dy);
  const int step_x = dx < 0.0 ? -1 : 1;
  const int step_y = dy < 0.0 ? -1 : 1;
  double side_x = dx == 0.0 ? inf : (dx < 0.0 ? (px - col) : (col + 1.0 - px)) * delta_x;
  double side_y = dy == 0.0 ? inf : (dy < 0.0 ? (py - row) : (row + 1.0 - py)) * delta_y;

  RayHit hit;
  if (map.in_bounds(col, row) && map.cell(col, row).terrain == Terrain::wall) {
    hit.col = col;
    hit.row = row;
    hit.inside_map = true;
    return hit;
  }
  for (;;) {
    double travelled;
    if (side_x < side_y) {
      travelled = side_x;
      side_x += delta_x;
      col += step_x;
      hit.vertical_side = true;
    } else {
      travelled = side_y;
      side_y += delta_y;
      row += step_y;
      hit.vertical_side = false;
    }
    hit.distance = travelled * cs;
    hit.col = col;
    hit.row = row;
    if (!map.in_bounds(col, row)) {
      hit.inside_map = false;
      return hit;
    }
    if (map.cell(col, row).terrain == Terrain::wall) {
      hit.inside_map = true;
      return hit;
    }
  }
}

std::vector<ColumnSample> first_person_columns(const world::WorldMap& map, const world::Pose& pose, int width,
                                               int height) {
  if (width < 1 || height < 1) throw Error(ErrorCode::config, fmt::format("view dimensions must be >= 1, got {}x{}", width, height));
  const auto [hx, hy] = world::heading(pose.yaw_deg);
  // Camera plane points left; its half-length tan(45°) = 1 spans the FOV.
  const double lx = -hy;
  const double ly = hx;
  std::vector<ColumnSample> cols(static_cast<std::size_t>(width));
  for (int i = 0; i < width; ++i) {
    const double cam = 1.0 - 2.0 * (i + 0.5) / width;
    const double rx = hx + lx * cam;
    const double ry = hy + ly * cam;
    const double len = std::sqrt(rx * rx + ry * ry);
    ColumnSample s;
    s.hit = cast_ray(map, pose.x_m, pose.y_m, rx / len, ry / len);
    const double perp = s.hit.distance / len;  // d·cos(offset)
    const double full = static_cast<double>(height);
    const double h = perp > 0.0 ? full * map.cell_size_m / perp : full;
    s.wall_height = static_cast<int>(std::clamp(h, 0.0, full));
    cols[static_cast<std::size_t>(i)] = s;
  }
  return cols;
}

namespace {

Rgb wall_color(const SceneView& scene, const RayHit& hit, RenderMode mode) {
  const auto& map = scene.world.map();
  if (mode == RenderMode::thermal) {
    if (!hit.inside_map) return kNoTemperature;
    return thermal_color(world::thermal_at(map, scene.plant, scene.plant_stale, hit.col, hit.row).celsius);
  }
  if (!hit.inside_map) return map.materials[static_cast<int>(Terrain::wall)];
  return map.materials[map.cell(hit.col, hit.row).material];
}

// Bresenham between two pixels, clipped to the image.
void draw_line(Image& img, int x0, int y0, int x1, int y1, Rgb c) {
  const int dx = std::abs(x1 - x0);
  const int dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1;
  const int sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    img.plot(x0, y0, c);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

}  // namespace

Image render_first_person(const SceneView& scene, const std::string& robot_id, RenderMode mode, int width,
                          int height) {
  const world::RobotState& robot = scene.world.robot(robot_id);
  const auto columns = first_person_columns(scene.world.map(), robot.pose, width, height);
  const Rgb ceiling = mode == RenderMode::lit ? kCeilingLit : kNoTemperature;
  const Rgb floor = mode == RenderMode::lit ? kFloorLit : kNoTemperature;

  Image img(width, height);
  for (int x = 0; x < width; ++x) {
    const ColumnSample& s = columns[static_cast<std::size_t>(x)];
    const int top = (height - s.wall_height) / 2;
    const int bottom = top + s.wall_height;
    const Rgb wall = wall_color(scene, s.hit, mode);
    for (int y = 0; y < height; ++y) {
      img.set(x, y, y < top ? ceiling : (y < bottom ? wall : floor));
    }
  }
  return img;
}

std::pair<int, int> topdown_pixel(const world::WorldMap& map, double x_m, double y_m, int ppc) {
  return {static_cast<int>(std::floor(x_m / map.cell_size_m * ppc)),
          static_cast<int>(std::floor(y_m / map.cell_size_m * ppc))};
}

Image render_topdown(const SceneView& scene, RenderMode mode, int ppc) {
  if (ppc < 1) throw Error(ErrorCode::config, "px_per_cell must be >= 1");
  const auto& map = scene.world.map();
  Image img(map.width * ppc, map.height * ppc);

  for (int r = 0; r < map.height; ++r) {
    for (int c = 0; c < map.width; ++c) {
      const Rgb color = mode == RenderMode::lit
                            ? map.materials[map.cell(c, r).material]
                            : thermal_color(world::thermal_at(map, scene.plant, scene.plant_stale, c, r).celsius);
      img.fill_rect(c * ppc, r * ppc, ppc, ppc, color);
    }
  }

  for (const auto& [id, robot] : scene.world.robots()) {
    if (!robot.trace_enabled) continue;
    bool first = true;
    std::pair<int, int> prev{};
    scene.world.trace(id).for_each([&](const world::TraceRecord& rec) {
      const auto p = topdown_pixel(map, rec.x_m, rec.y_m, ppc);
      if (first) {
        img.plot(p.first, p.second, robot.color);
        first = false;
      } else {
        draw_line(img, prev.first, prev.second, p.first, p.second, robot.color);
      }
      prev = p;
    });
  }

  for (const auto& [id, robot] : scene.world.robots()) {
    const auto [px, py] = topdown_pixel(map, robot.pose.x_m, robot.pose.y_m, ppc);
    img.fill_rect(px - 1, py - 1, 3, 3, robot.color);
    const auto [hx, hy] = world::heading(robot.pose.yaw_deg);
    img.plot(px + static_cast<int>(std::lround(2.0 * hx)), py + static_cast<int>(std::lround(2.0 * hy)), kHeadingTick);
  }
  return img;
}

}  // namespace npptwin::render
