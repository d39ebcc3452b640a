#pragma once

#include "npptwin/world/map.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace npptwin::world {

enum class Action : std::uint8_t { forward, backward, turn_left, turn_right, up, down };

std::string_view to_string(Action a);

inline constexpr double kTurnStep_deg = 15.0;
inline constexpr double kStride_m = 1.0;
inline constexpr double kClimbStep_m = 0.5;
inline constexpr double kAltitudeCeiling_m = 10.0;

using SessionId = std::uint64_t;

struct RobotState {
  std::string id;
  RobotKind kind = RobotKind::wheeled;
  Pose pose;
  Pose spawn;
  bool trace_enabled = false;
  std::optional<SessionId> possessed_by;
  Rgb color{255, 255, 255};
};

struct MoveResult {
  Pose pose;
  bool collided = false;
};

// Terrain gating per locomotion class.
bool can_enter(RobotKind kind, Terrain terrain);
bool action_allowed(RobotKind kind, Action action);

// Wrap to (-180, 180].
double wrap_degrees(double deg);

// Unit heading for a yaw; multiples of 90° map to exact axis vectors.
std::pair<double, double> heading(double yaw_deg);

// Kinematic step. Throws Error(bad_request) when the action is illegal for
// the robot's kind. Blocked translations return the unchanged pose with
// collided set.
MoveResult apply_move(const RobotState& robot, Action action, const WorldMap& map);

// Relative angle of (tx, ty) seen from the pose: 0 dead ahead, positive
// counter-clockwise. 0 when the robot stands on the target.
double compass_bearing(const Pose& pose, double tx, double ty);

double horizontal_distance(const Pose& pose, double tx, double ty);

}  // namespace npptwin::world
