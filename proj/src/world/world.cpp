#include "npptwin/world/world.hpp"

#include <cmath>
#include <fmt/format.h>
#include <random>

namespace npptwin::world {

namespace {

// Saturated marker/trace colours, none of which appear in the terrain palette.
constexpr Rgb kRobotColors[] = {
    {255, 64, 64},  {64, 255, 64},   {64, 128, 255}, {255, 255, 0},  {255, 0, 255},  {0, 255, 255},
    {255, 128, 0},  {128, 0, 255},   {0, 255, 128},  {255, 0, 128},  {128, 255, 0},  {0, 128, 255},
    {255, 192, 64}, {192, 64, 255},  {64, 255, 192}, {255, 64, 192}, {192, 255, 64}, {64, 192, 255},
    {255, 96, 96},  {96, 255, 96},   {96, 96, 255},  {224, 224, 32}, {224, 32, 224}, {32, 224, 224},
};

}  // namespace

ThermalReading thermal_at(const WorldMap& map, const mirror::CacheGeneration& plant, bool plant_stale, int col,
                          int row) {
  if (!map.in_bounds(col, row)) return {};
  const Cell& cell = map.cell(col, row);
  if (cell.binding >= 0) {
    const auto& var = map.thermal_bindings[static_cast<std::size_t>(cell.binding)].variable;
    auto v = plant.value(var);
    return {v, plant_stale || !v};
  }
  if (cell.base_temp_c) return {cell.base_temp_c, false};
  return {};
}

bool pose_legal(const WorldMap& map, RobotKind kind, const Pose& pose) {
  const auto cell = map.cell_at(pose.x_m, pose.y_m);
  if (!cell) return false;
  if (!can_enter(kind, map.cell(cell->first, cell->second).terrain)) return false;
  if (kind != RobotKind::aerial && pose.z_m != 0.0) return false;
  return pose.z_m >= 0.0 && pose.z_m <= kAltitudeCeiling_m;
}

World::World(std::shared_ptr<const WorldMap> map) : map_(std::move(map)) {
  for (const auto& sp : map_->spawns) add_robot(sp.name, sp.kind, sp.pose);
}

const RobotState& World::robot(const std::string& id) const {
  auto it = robots_.find(id);
  if (it == robots_.end()) throw Error(ErrorCode::not_found, "robot " + id);
  return it->second;
}

RobotState& World::mutable_robot(const std::string& id) {
  auto it = robots_.find(id);
  if (it == robots_.end()) throw Error(ErrorCode::not_found, "robot " + id);
  return it->second;
}

const RobotState& World::add_robot(const std::string& id, RobotKind kind, const Pose& pose) {
  if (robots_.contains(id)) throw Error(ErrorCode::conflict, "robot " + id + " already exists");
  if (!pose_legal(*map_, kind, pose)) throw Error(ErrorCode::config, "illegal spawn pose for " + id);
  RobotState r;
  r.id = id;
  r.kind = kind;
  r.pose = pose;
  r.pose.yaw_deg = wrap_degrees(pose.yaw_deg);
  r.spawn = r.pose;
  r.color = kRobotColors[color_cursor_++ % std::size(kRobotColors)];
  traces_[id];
  return robots_.emplace(id, std::move(r)).first->second;
}

std::vector<std::string> World::spawn_swarm(int n, const std::string& zone_name, std::uint64_t seed) {
  const Zone* zone = map_->zone(zone_name);
  if (zone == nullptr) throw Error(ErrorCode::not_found, "zone " + zone_name);
  if (n < 1) throw Error(ErrorCode::config, "swarm size must be positive");
  const CellRect& z = zone->rect;

  int capacity = 0;
  for (int r = z.y; r < z.y + z.h; ++r) {
    for (int c = z.x; c < z.x + z.w; ++c) {
      if (map_->cell(c, r).terrain == Terrain::flat) ++capacity;
    }
  }
  auto capacity_error = [&] {
    return Error(ErrorCode::config, fmt::format("zone {} holds at most {} robots, requested {}", zone_name, capacity, n));
  };
  if (capacity < n) throw capacity_error();

  // Block of `cols` columns filled row-major; the first n cells must be FLAT.
  auto fits = [&](int ox, int oy, int cols) {
    for (int i = 0; i < n; ++i) {
      const int c = ox + i % cols;
      const int r = oy + i / cols;
      if (!z.contains(c, r) || map_->cell(c, r).terrain != Terrain::flat) return false;
    }
    return true;
  };

  const int square = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  for (int cols = square; cols <= n; ++cols) {
    const int rows = (n + cols - 1) / cols;
    std::vector<std::pair<int, int>> origins;
    for (int oy = z.y; oy + rows <= z.y + z.h; ++oy) {
      for (int ox = z.x; ox + cols <= z.x + z.w; ++ox) {
        if (fits(ox, oy, cols)) origins.emplace_back(ox, oy);
      }
    }
    if (origins.empty()) continue;
    std::mt19937_64 rng(seed);
    const auto [ox, oy] = seed == 0 ? origins.front() : origins[rng() % origins.size()];

    const int width = n >= 100 ? 3 : 2;
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) {
      const std::string id = fmt::format("swarm_{:0{}d}", i, width);
      const double x = (ox + i % cols + 0.5) * map_->cell_size_m;
      const double y = (oy + i / cols + 0.5) * map_->cell_size_m;
      add_robot(id, RobotKind::wheeled, Pose{x, y, 0.0, 0.0});
      ids.push_back(id);
    }
    return ids;
  }
  throw capacity_error();
}

void World::possess(SessionId session, const std::string& robot_id) {
  RobotState& r = mutable_robot(robot_id);
  if (r.possessed_by && *r.possessed_by != session) {
    throw Error(ErrorCode::conflict, fmt::format("robot {} is possessed by another session", robot_id));
  }
  if (r.possessed_by == session) return;
  release(session);
  r.possessed_by = session;
}

void World::release(SessionId session) {
  for (auto& [id, r] : robots_) {
    if (r.possessed_by == session) r.possessed_by.reset();
  }
}

std::optional<std::string> World::possessed_robot(SessionId session) const {
  for (const auto& [id, r] : robots_) {
    if (r.possessed_by == session) return id;
  }
  return std::nullopt;
}

MoveResult World::move(SessionId session, const std::string& robot_id, Action action) {
  const RobotState& r = robot(robot_id);
  if (r.possessed_by != session) throw Error(ErrorCode::forbidden, fmt::format("robot {} not possessed by this session", robot_id));
  return apply(robot_id, action);
}

MoveResult World::apply(const std::string& robot_id, Action action) {
  RobotState& r = mutable_robot(robot_id);
  MoveResult m = apply_move(r, action, *map_);
  r.pose = m.pose;
  return m;
}

void World::teleport(const std::string& robot_id, const Pose& pose) {
  RobotState& r = mutable_robot(robot_id);
  if (!pose_legal(*map_, r.kind, pose)) throw Error(ErrorCode::config, "illegal pose for " + robot_id);
  r.pose = pose;
}

void World::set_trace(const std::string& robot_id, bool enabled) { mutable_robot(robot_id).trace_enabled = enabled; }

const TraceLog& World::trace(const std::string& robot_id) const {
  robot(robot_id);
  static const TraceLog kEmpty;
  auto it = traces_.find(robot_id);
  return it == traces_.end() ? kEmpty : it->second;
}

void World::clear_trace(const std::string& robot_id) {
  robot(robot_id);
  traces_[robot_id].clear();
}

std::vector<TraceRecord> World::record_traces(std::int64_t t_ms) {
  std::vector<TraceRecord> added;
  for (const auto& [id, r] : robots_) {
    if (!r.trace_enabled) continue;
    TraceLog& log = traces_[id];
    if (!log.empty() && log.back().t_ms >= t_ms) continue;  // t_ms strictly increases
    TraceRecord rec{t_ms, id, r.pose.x_m, r.pose.y_m, r.pose.z_m, r.pose.yaw_deg};
    log.append(rec);
    added.push_back(std::move(rec));
  }
  return added;
}

}  // namespace npptwin::world
