#pragma once

#include "npptwin/render/render.hpp"
#include "npptwin/world/robot.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace npptwin::twin {

enum class CommandKind {
  robot_location,   // vget /robot/<id>/location
  robot_rotation,   // vget /robot/<id>/rotation
  robot_compass,    // vget /robot/<id>/compass
  robot_trace_csv,  // vget /robot/<id>/trace
  robot_move,       // vset /robot/<id>/move forward|backward
  robot_rotate,     // vset /robot/<id>/rotate left|right
  robot_altitude,   // vset /robot/<id>/altitude up|down
  robot_trace,      // vset /robot/<id>/trace on|off
  camera,           // vget /camera/<id>/lit|thermal <w> <h>
  topdown,          // vget /topdown lit|thermal
  target_location,  // vget /target/location
  plant_get,        // vget /plant/<var>
  plant_set,        // vset /plant/<var> <decimal>
  possess,          // vset /session/possess <id>
  session_events,   // vset /session/events on|off
  env_reset,        // vset /env/reset
  env_step,         // vrun /env/step <action_id>
  sim_time,         // vget /sim/time
  sim_advance,      // vrun /sim/advance <ms>
};

struct Command {
  CommandKind kind = CommandKind::sim_time;
  std::string robot_id;
  std::string variable;
  world::Action action = world::Action::forward;  // move/rotate/altitude
  bool flag = false;                              // trace/events on|off
  render::RenderMode mode = render::RenderMode::lit;
  int width = 0;
  int height = 0;
  std::string literal;  // plant_set value text
  double value = 0.0;
  int action_id = 0;
  std::int64_t ms = 0;

  // True for commands that change twin state and therefore run on the tick
  // loop; the rest are answered from the published snapshot.
  bool mutates() const;
};

bool is_robot_id(std::string_view id);

inline constexpr int kMaxViewDimension = 4096;

// Throws Error(bad_request) for anything outside the grammar.
Command parse_command(std::string_view body);
// Canonical text; format_command(parse_command(x)) == x for grammatical x.
std::string format_command(const Command& command);

}  // namespace npptwin::twin
