#include "npptwin/env/env.hpp"

#include "npptwin/error.hpp"

#include <fmt/format.h>

namespace npptwin::env {

void EnvConfig::validate() const {
  if (step_penalty < 0.0 || collision_penalty < 0.0) throw Error(ErrorCode::config, "penalties must be >= 0");
  if (!(goal_radius_m > 0.0)) throw Error(ErrorCode::config, "goal radius must be > 0");
  if (max_steps < 1) throw Error(ErrorCode::config, "max_steps must be >= 1");
  if (obs_width < 1 || obs_height < 1) throw Error(ErrorCode::config, "observation size must be >= 1");
}

int action_count(world::RobotKind kind) { return kind == world::RobotKind::aerial ? 6 : 4; }

world::Action action_from_id(int id, world::RobotKind kind) {
  if (id < 0 || id >= action_count(kind)) {
    throw Error(ErrorCode::bad_request, fmt::format("action {} not in the action set of a {} robot", id, world::to_string(kind)));
  }
  return static_cast<world::Action>(id);
}

double reward(const EnvConfig& c, double d_prev, double d_cur, bool collided, bool reached) {
  double r = (d_prev - d_cur) - c.step_penalty;
  if (collided) r -= c.collision_penalty;
  if (reached) r += c.terminal_bonus;
  return r;
}

Episode::Episode(EnvConfig config) : config_(std::move(config)) { config_.validate(); }

void Episode::reset(world::World& world) {
  const auto& robot = world.robot(config_.robot_id);
  world.teleport(config_.robot_id, robot.spawn);
  world.clear_trace(config_.robot_id);
  steps_ = 0;
  done_ = false;
}

StepOutcome Episode::step(world::World& world, int action_id) {
  if (done_) throw Error(ErrorCode::conflict, "episode is done; reset before stepping");
  const auto& robot = world.robot(config_.robot_id);
  const auto action = action_from_id(action_id, robot.kind);
  const auto& target = world.map().target;

  const double d_prev = world::horizontal_distance(robot.pose, target.x_m, target.y_m);
  const world::MoveResult move = world.apply(config_.robot_id, action);
  const double d_cur = world::horizontal_distance(move.pose, target.x_m, target.y_m);
  const bool reached = d_cur <= config_.goal_radius_m;

  ++steps_;
  done_ = reached || steps_ >= config_.max_steps;

  StepOutcome out;
  out.reward = reward(config_, d_prev, d_cur, move.collided, reached);
  out.done = done_;
  out.reached = reached;
  out.info = {d_cur, move.collided, steps_, world::compass_bearing(move.pose, target.x_m, target.y_m)};
  return out;
}

Env::Env(world::World& world, EnvConfig config, const mirror::CacheGeneration& plant)
    : world_(world), episode_(std::move(config)), plant_(plant) {
  world_.robot(episode_.config().robot_id);
}

render::Image Env::observe() const {
  const auto& c = episode_.config();
  return render::render_first_person(render::SceneView{world_, plant_, false}, c.robot_id, c.obs_mode, c.obs_width,
                                     c.obs_height);
}

render::Image Env::reset() {
  episode_.reset(world_);
  return observe();
}

StepResult Env::step(int action_id) {
  const StepOutcome o = episode_.step(world_, action_id);
  return StepResult{observe(), o.reward, o.done, o.info};
}

}  // namespace npptwin::env
