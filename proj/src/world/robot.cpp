#include "npptwin/world/robot.hpp"

#include <cmath>
#include <fmt/format.h>
#include <numbers>

namespace npptwin::world {

std::string_view to_string(Action a) {
  switch (a) {
    case Action::forward: return "forward";
    case Action::backward: return "backward";
    case Action::turn_left: return "turn_left";
    case Action::turn_right: return "turn_right";
    case Action::up: return "up";
    case Action::down: return "down";
  }
  return "unknown";
}

bool can_enter(RobotKind kind, Terrain terrain) {
  switch (terrain) {
    case Terrain::flat: return true;
    case Terrain::uneven: return kind == RobotKind::quadruped || kind == RobotKind::aerial;
    case Terrain::stairs: return kind == RobotKind::bipedal || kind == RobotKind::aerial;
    case Terrain::water: return kind == RobotKind::aerial;
    case Terrain::wall: return false;
  }
  return false;
}

bool action_allowed(RobotKind kind, Action action) {
  if (action == Action::up || action == Action::down) return kind == RobotKind::aerial;
  return true;
}

double wrap_degrees(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r > 180.0) r -= 360.0;
  if (r <= -180.0) r += 360.0;
  return r;
}

std::pair<double, double> heading(double yaw_deg) {
  const double y = wrap_degrees(yaw_deg);
  if (y == 0.0) return {1.0, 0.0};
  if (y == 90.0) return {0.0, 1.0};
  if (y == 180.0) return {-1.0, 0.0};
  if (y == -90.0) return {0.0, -1.0};
  const double rad = y * std::numbers::pi / 180.0;
  return {std::cos(rad), std::sin(rad)};
}

MoveResult apply_move(const RobotState& robot, Action action, const WorldMap& map) {
  if (!action_allowed(robot.kind, action)) {
    throw Error(ErrorCode::bad_request,
                fmt::format("action {} not available to {} robot {}", to_string(action), to_string(robot.kind), robot.id));
  }
  MoveResult out{robot.pose, false};
  switch (action) {
    case Action::turn_left: out.pose.yaw_deg = wrap_degrees(robot.pose.yaw_deg + kTurnStep_deg); return out;
    case Action::turn_right: out.pose.yaw_deg = wrap_degrees(robot.pose.yaw_deg - kTurnStep_deg); return out;
    case Action::up:
    case Action::down: {
      const double z = robot.pose.z_m + (action == Action::up ? kClimbStep_m : -kClimbStep_m);
      if (z < 0.0 || z > kAltitudeCeiling_m) {
        out.collided = true;
      } else {
        out.pose.z_m = z;
      }
      return out;
    }
    case Action::forward:
    case Action::backward: {
      const auto [hx, hy] = heading(robot.pose.yaw_deg);
      const double sign = action == Action::forward ? 1.0 : -1.0;
      const double nx = robot.pose.x_m + sign * kStride_m * hx;
      const double ny = robot.pose.y_m + sign * kStride_m * hy;
      const auto cell = map.cell_at(nx, ny);
      if (!cell || !can_enter(robot.kind, map.cell(cell->first, cell->second).terrain)) {
        out.collided = true;
        return out;
      }
      out.pose.x_m = nx;
      out.pose.y_m = ny;
      return out;
    }
  }
  return out;
}

double compass_bearing(const Pose& pose, double tx, double ty) {
  const double dx = tx - pose.x_m;
  const double dy = ty - pose.y_m;
  if (dx == 0.0 && dy == 0.0) return 0.0;
  const double absolute = std::atan2(dy, dx) * (180.0 / std::numbers::pi);
  return wrap_degrees(absolute - pose.yaw_deg);
}

double horizontal_distance(const Pose& pose, double tx, double ty) {
  return std::hypot(tx - pose.x_m, ty - pose.y_m);
}

}  // namespace npptwin::world
