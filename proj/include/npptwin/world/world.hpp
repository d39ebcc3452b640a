#pragma once

#include "npptwin/mirror/cache.hpp"
#include "npptwin/world/map.hpp"
#include "npptwin/world/robot.hpp"
#include "npptwin/world/trace.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace npptwin::world {

struct ThermalReading {
  std::optional<double> celsius;  // none: surface without a temperature
  bool stale = false;
};

// Temperature of a cell: bound cells read the mirrored variable, static
// cells their base temperature, anything else none.
ThermalReading thermal_at(const WorldMap& map, const mirror::CacheGeneration& plant, bool plant_stale, int col,
                          int row);

// Robots, possession and traces on top of an immutable map. A plain value:
// copying it is how the twin publishes snapshots.
class World {
public:
  explicit World(std::shared_ptr<const WorldMap> map);

  const WorldMap& map() const { return *map_; }
  const std::shared_ptr<const WorldMap>& map_ptr() const { return map_; }

  const std::map<std::string, RobotState>& robots() const { return robots_; }
  bool has_robot(const std::string& id) const { return robots_.contains(id); }
  // Throws Error(not_found).
  const RobotState& robot(const std::string& id) const;

  // Throws Error(conflict) on duplicate id, Error(config) for an illegal pose.
  const RobotState& add_robot(const std::string& id, RobotKind kind, const Pose& pose);

  // Places n wheeled robots (swarm_00, swarm_01, ...) on distinct adjacent
  // FLAT cells forming a compact rectangle inside the zone. Throws
  // Error(config) naming the capacity when they do not fit.
  std::vector<std::string> spawn_swarm(int n, const std::string& zone, std::uint64_t seed);

  // Throws Error(not_found) or Error(conflict). Releases the session's
  // previous robot.
  void possess(SessionId session, const std::string& robot_id);
  void release(SessionId session);
  std::optional<std::string> possessed_robot(SessionId session) const;

  // Move on behalf of a session; requires possession (Error(forbidden)).
  MoveResult move(SessionId session, const std::string& robot_id, Action action);
  // Move without the possession check.
  MoveResult apply(const std::string& robot_id, Action action);
  void teleport(const std::string& robot_id, const Pose& pose);

  void set_trace(const std::string& robot_id, bool enabled);
  const TraceLog& trace(const std::string& robot_id) const;
  void clear_trace(const std::string& robot_id);
  // One record per trace-enabled robot at time t_ms; returns what was added.
  std::vector<TraceRecord> record_traces(std::int64_t t_ms);

  std::int64_t time_ms() const { return time_ms_; }
  void set_time_ms(std::int64_t t) { time_ms_ = t; }

private:
  RobotState& mutable_robot(const std::string& id);

  std::shared_ptr<const WorldMap> map_;
  std::map<std::string, RobotState> robots_;
  std::map<std::string, TraceLog> traces_;
  std::size_t color_cursor_ = 0;
  std::int64_t time_ms_ = 0;
};

// True when the pose sits on a cell the kind may occupy.
bool pose_legal(const WorldMap& map, RobotKind kind, const Pose& pose);

}  // namespace npptwin::world
