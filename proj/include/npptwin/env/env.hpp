#pragma once

#include "npptwin/render/render.hpp"
#include "npptwin/world/world.hpp"

#include <optional>
#include <string>

namespace npptwin::env {

struct EnvConfig {
  std::string robot_id;
  double goal_radius_m = 0.5;
  int max_steps = 500;
  double step_penalty = 0.01;
  double collision_penalty = 0.05;
  double terminal_bonus = 1.0;
  int obs_width = render::kDefaultViewWidth;
  int obs_height = render::kDefaultViewHeight;
  render::RenderMode obs_mode = render::RenderMode::lit;

  // Throws Error(config).
  void validate() const;
};

// 0 forward, 1 backward, 2 turn_left, 3 turn_right, 4 up, 5 down.
// Throws Error(bad_request) for ids outside the kind's action set.
world::Action action_from_id(int action_id, world::RobotKind kind);
int action_count(world::RobotKind kind);

double reward(const EnvConfig& config, double d_prev, double d_cur, bool collided, bool reached);

struct StepInfo {
  double distance_m = 0.0;
  bool collided = false;
  int steps = 0;
  double bearing_deg = 0.0;
};

// Step bookkeeping without the observation, so the twin can compute it on
// its tick thread and render afterwards from the published snapshot.
struct StepOutcome {
  double reward = 0.0;
  bool done = false;
  bool reached = false;
  StepInfo info;
};

struct StepResult {
  render::Image observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

// Episode state for one robot. Mutates the world it is handed; never owns it.
class Episode {
public:
  explicit Episode(EnvConfig config);

  const EnvConfig& config() const { return config_; }
  int steps() const { return steps_; }
  bool done() const { return done_; }

  // Teleport to spawn, zero the counter, truncate the trace log.
  void reset(world::World& world);
  // Throws Error(conflict) once the episode is done.
  StepOutcome step(world::World& world, int action_id);

private:
  EnvConfig config_;
  int steps_ = 0;
  bool done_ = false;
};

// In-process environment: an Episode plus rendering over a fixed plant
// sample. The networked path lives in the twin server.
class Env {
public:
  Env(world::World& world, EnvConfig config, const mirror::CacheGeneration& plant);

  render::Image reset();
  StepResult step(int action_id);
  render::Image observe() const;

  const Episode& episode() const { return episode_; }

private:
  world::World& world_;
  Episode episode_;
  const mirror::CacheGeneration& plant_;
};

}  // namespace npptwin::env
