#include "npptwin/twin/command.hpp"

#include "npptwin/error.hpp"
#include "npptwin/mirror/protocol.hpp"
#include "npptwin/numeric_text.hpp"

#include <fmt/format.h>
#include <vector>

namespace npptwin::twin {

namespace {

[[noreturn]] void reject(std::string_view why) { throw Error(ErrorCode::bad_request, std::string(why)); }

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto p = s.find(sep, start);
    out.push_back(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
    if (p == std::string_view::npos) return out;
    start = p + 1;
  }
}

bool on_off(std::string_view s) {
  if (s == "on") return true;
  if (s == "off") return false;
  reject(fmt::format("expected on|off, got '{}'", s));
}

int view_dim(std::string_view s) {
  auto v = parse_count(s);
  if (!v || *v < 1 || *v > kMaxViewDimension) reject(fmt::format("bad view dimension '{}'", s));
  return static_cast<int>(*v);
}

void expect_args(const std::vector<std::string_view>& args, std::size_t n, std::string_view path) {
  if (args.size() != n) reject(fmt::format("{} expects {} argument(s)", path, n));
}

std::string_view move_word(world::Action a) {
  switch (a) {
    case world::Action::forward: return "forward";
    case world::Action::backward: return "backward";
    case world::Action::turn_left: return "left";
    case world::Action::turn_right: return "right";
    case world::Action::up: return "up";
    case world::Action::down: return "down";
  }
  return "";
}

}  // namespace

bool is_robot_id(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

bool Command::mutates() const {
  switch (kind) {
    case CommandKind::robot_move:
    case CommandKind::robot_rotate:
    case CommandKind::robot_altitude:
    case CommandKind::robot_trace:
    case CommandKind::possess:
    case CommandKind::env_reset:
    case CommandKind::env_step:
    case CommandKind::sim_advance: return true;
    default: return false;
  }
}

Command parse_command(std::string_view body) {
  if (body.empty()) reject("empty command");
  auto fields = split(body, ' ');
  for (auto f : fields) {
    if (f.empty()) reject("empty field in command");
  }
  const std::string_view verb = fields[0];
  if (fields.size() < 2) reject(fmt::format("unknown command '{}'", body));
  const std::string_view path = fields[1];
  const std::vector<std::string_view> args(fields.begin() + 2, fields.end());
  if (!path.starts_with('/')) reject(fmt::format("bad path '{}'", path));
  const auto seg = split(path.substr(1), '/');

  Command c;
  if (verb == "vget") {
    if (seg.size() == 3 && seg[0] == "robot") {
      if (!is_robot_id(seg[1])) reject(fmt::format("bad robot id '{}'", seg[1]));
      c.robot_id = std::string(seg[1]);
      expect_args(args, 0, path);
      if (seg[2] == "location") c.kind = CommandKind::robot_location;
      else if (seg[2] == "rotation") c.kind = CommandKind::robot_rotation;
      else if (seg[2] == "compass") c.kind = CommandKind::robot_compass;
      else if (seg[2] == "trace") c.kind = CommandKind::robot_trace_csv;
      else reject(fmt::format("unknown robot property '{}'", seg[2]));
      return c;
    }
    if (seg.size() == 3 && seg[0] == "camera") {
      if (!is_robot_id(seg[1])) reject(fmt::format("bad robot id '{}'", seg[1]));
      auto mode = render::parse_render_mode(seg[2]);
      if (!mode) reject(fmt::format("unknown camera mode '{}'", seg[2]));
      expect_args(args, 2, path);
      c.kind = CommandKind::camera;
      c.robot_id = std::string(seg[1]);
      c.mode = *mode;
      c.width = view_dim(args[0]);
      c.height = view_dim(args[1]);
      return c;
    }
    if (seg.size() == 1 && seg[0] == "topdown") {
      expect_args(args, 1, path);
      auto mode = render::parse_render_mode(args[0]);
      if (!mode) reject(fmt::format("unknown topdown mode '{}'", args[0]));
      c.kind = CommandKind::topdown;
      c.mode = *mode;
      return c;
    }
    if (seg.size() == 2 && seg[0] == "target" && seg[1] == "location") {
      expect_args(args, 0, path);
      c.kind = CommandKind::target_location;
      return c;
    }
    if (seg.size() == 2 && seg[0] == "plant") {
      if (!mirror::is_variable_name(seg[1])) reject(fmt::format("bad variable name '{}'", seg[1]));
      expect_args(args, 0, path);
      c.kind = CommandKind::plant_get;
      c.variable = std::string(seg[1]);
      return c;
    }
    if (seg.size() == 2 && seg[0] == "sim" && seg[1] == "time") {
      expect_args(args, 0, path);
      c.kind = CommandKind::sim_time;
      return c;
    }
  } else if (verb == "vset") {
    if (seg.size() == 3 && seg[0] == "robot") {
      if (!is_robot_id(seg[1])) reject(fmt::format("bad robot id '{}'", seg[1]));
      c.robot_id = std::string(seg[1]);
      expect_args(args, 1, path);
      const auto a = args[0];
      if (seg[2] == "move") {
        c.kind = CommandKind::robot_move;
        if (a == "forward") c.action = world::Action::forward;
        else if (a == "backward") c.action = world::Action::backward;
        else reject(fmt::format("expected forward|backward, got '{}'", a));
      } else if (seg[2] == "rotate") {
        c.kind = CommandKind::robot_rotate;
        if (a == "left") c.action = world::Action::turn_left;
        else if (a == "right") c.action = world::Action::turn_right;
        else reject(fmt::format("expected left|right, got '{}'", a));
      } else if (seg[2] == "altitude") {
        c.kind = CommandKind::robot_altitude;
        if (a == "up") c.action = world::Action::up;
        else if (a == "down") c.action = world::Action::down;
        else reject(fmt::format("expected up|down, got '{}'", a));
      } else if (seg[2] == "trace") {
        c.kind = CommandKind::robot_trace;
        c.flag = on_off(a);
      } else {
        reject(fmt::format("unknown robot control '{}'", seg[2]));
      }
      return c;
    }
    if (seg.size() == 2 && seg[0] == "plant") {
      if (!mirror::is_variable_name(seg[1])) reject(fmt::format("bad variable name '{}'", seg[1]));
      expect_args(args, 1, path);
      auto v = parse_decimal(args[0]);
      if (!v) reject(fmt::format("bad decimal '{}'", args[0]));
      c.kind = CommandKind::plant_set;
      c.variable = std::string(seg[1]);
      c.literal = std::string(args[0]);
      c.value = *v;
      return c;
    }
    if (seg.size() == 2 && seg[0] == "session" && seg[1] == "possess") {
      expect_args(args, 1, path);
      if (!is_robot_id(args[0])) reject(fmt::format("bad robot id '{}'", args[0]));
      c.kind = CommandKind::possess;
      c.robot_id = std::string(args[0]);
      return c;
    }
    if (seg.size() == 2 && seg[0] == "session" && seg[1] == "events") {
      expect_args(args, 1, path);
      c.kind = CommandKind::session_events;
      c.flag = on_off(args[0]);
      return c;
    }
    if (seg.size() == 2 && seg[0] == "env" && seg[1] == "reset") {
      expect_args(args, 0, path);
      c.kind = CommandKind::env_reset;
      return c;
    }
  } else if (verb == "vrun") {
    if (seg.size() == 2 && seg[0] == "env" && seg[1] == "step") {
      expect_args(args, 1, path);
      auto a = parse_count(args[0]);
      if (!a || *a > 5) reject(fmt::format("bad action id '{}'", args[0]));
      c.kind = CommandKind::env_step;
      c.action_id = static_cast<int>(*a);
      return c;
    }
    if (seg.size() == 2 && seg[0] == "sim" && seg[1] == "advance") {
      expect_args(args, 1, path);
      auto ms = parse_count(args[0]);
      if (!ms || *ms < 1 || *ms > 3'600'000) reject(fmt::format("bad advance duration '{}'", args[0]));
      c.kind = CommandKind::sim_advance;
      c.ms = *ms;
      return c;
    }
  }
  reject(fmt::format("unknown command '{}'", body));
}

std::string format_command(const Command& c) {
  switch (c.kind) {
    case CommandKind::robot_location: return fmt::format("vget /robot/{}/location", c.robot_id);
    case CommandKind::robot_rotation: return fmt::format("vget /robot/{}/rotation", c.robot_id);
    case CommandKind::robot_compass: return fmt::format("vget /robot/{}/compass", c.robot_id);
    case CommandKind::robot_trace_csv: return fmt::format("vget /robot/{}/trace", c.robot_id);
    case CommandKind::robot_move: return fmt::format("vset /robot/{}/move {}", c.robot_id, move_word(c.action));
    case CommandKind::robot_rotate: return fmt::format("vset /robot/{}/rotate {}", c.robot_id, move_word(c.action));
    case CommandKind::robot_altitude: return fmt::format("vset /robot/{}/altitude {}", c.robot_id, move_word(c.action));
    case CommandKind::robot_trace: return fmt::format("vset /robot/{}/trace {}", c.robot_id, c.flag ? "on" : "off");
    case CommandKind::camera:
      return fmt::format("vget /camera/{}/{} {} {}", c.robot_id, render::to_string(c.mode), c.width, c.height);
    case CommandKind::topdown: return fmt::format("vget /topdown {}", render::to_string(c.mode));
    case CommandKind::target_location: return "vget /target/location";
    case CommandKind::plant_get: return fmt::format("vget /plant/{}", c.variable);
    case CommandKind::plant_set:
      return fmt::format("vset /plant/{} {}", c.variable, c.literal.empty() ? format_number(c.value) : c.literal);
    case CommandKind::possess: return fmt::format("vset /session/possess {}", c.robot_id);
    case CommandKind::session_events: return fmt::format("vset /session/events {}", c.flag ? "on" : "off");
    case CommandKind::env_reset: return "vset /env/reset";
    case CommandKind::env_step: return fmt::format("vrun /env/step {}", c.action_id);
    case CommandKind::sim_time: return "vget /sim/time";
    case CommandKind::sim_advance: return fmt::format("vrun /sim/advance {}", c.ms);
  }
  return {};
}

}  // namespace npptwin::twin
