#include "npptwin/twin/server.hpp"

#include "npptwin/error.hpp"
#include "npptwin/numeric_text.hpp"
#include "npptwin/twin/frame.hpp"
#include "npptwin/twin/gateway.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>

namespace npptwin::twin {

namespace {

int bridge_code(const Error& e) {
  switch (e.code()) {
    case ErrorCode::bad_request:
    case ErrorCode::forbidden:
    case ErrorCode::not_found:
    case ErrorCode::conflict:
    case ErrorCode::unavailable:
      return e.wire_code();
    case ErrorCode::io:
      return 503;
    default:
      return 400;
  }
}

Reply ok(std::string text) {
  Reply r;
  r.ok = true;
  r.text = text.empty() ? "ok" : "ok " + text;
  return r;
}

std::string num(double v) { return format_number(v); }

std::string pose_text(const world::Pose& p) { return fmt::format("{} {} {}", num(p.x_m), num(p.y_m), num(p.z_m)); }

}  // namespace

std::string Reply::bridge_body() const {
  if (!image) return text;
  return text + " " + render::encode_ppm(*image);
}

std::string Reply::detail() const {
  auto space = text.find(' ');
  return space == std::string::npos ? std::string() : text.substr(space + 1);
}

Reply error_reply(int code, std::string_view detail) {
  Reply r;
  r.ok = false;
  r.text = fmt::format("error {} {}", code, detail);
  return r;
}

TwinServer::TwinServer(TwinConfig config)
    : config_(std::move(config)),
      map_(std::make_shared<const world::WorldMap>(config_.map_path.empty() ? world::load_default_map()
                                                                             : world::load_map_file(config_.map_path))),
      world_(map_),
      plant_gen_(std::make_shared<const mirror::CacheGeneration>()) {
  if (config_.tick_ms < 1) throw Error(ErrorCode::config, "tick_ms must be at least 1");
  if (config_.topdown_interval_ms < 1) throw Error(ErrorCode::config, "topdown interval must be at least 1 ms");
  env::EnvConfig probe = config_.env_defaults;
  probe.validate();
  if (config_.swarm_size > 0) swarm_ids_ = world_.spawn_swarm(config_.swarm_size, config_.swarm_zone, config_.seed);
  if (config_.plant_addr) {
    mirror::PollerConfig pc;
    pc.endpoint = *config_.plant_addr;
    pc.period = config_.poll_period;
    poller_ = std::make_unique<mirror::MirrorPoller>(pc, cache_);
  }
  if (config_.record_dir) {
    std::filesystem::create_directories(*config_.record_dir);
    recorder_.emplace(*config_.record_dir, config_.topdown_interval_ms, 0);
  }
  publish();
}

TwinServer::~TwinServer() { stop(); }

void TwinServer::start() {
  if (started_) return;
  started_ = true;
  if (poller_) {
    if (config_.mode == plant::ClockMode::lockstep) {
      if (!poller_->set_mode(plant::ClockMode::lockstep)) spdlog::warn("plant unreachable; will keep retrying");
      poller_->sync_once();
      plant_gen_ = cache_.current();
      publish();
    } else {
      poller_->start();
    }
  }
  {
    std::lock_guard lock(queue_mutex_);
    stopping_ = false;
  }
  tick_thread_ = std::thread([this] {
    if (config_.mode == plant::ClockMode::lockstep) {
      tick_loop_lockstep();
    } else {
      tick_loop_realtime();
    }
  });
  bridge_ = std::make_unique<net::TcpServer>(config_.host, config_.bridge_port,
                                             [this](net::Socket& socket) { serve_bridge(socket); });
  bridge_->start();
  if (config_.http_port) {
    gateway_ = std::make_unique<Gateway>(*this, config_.host, *config_.http_port, config_.web_root,
                                         config_.event_period);
    gateway_->start();
  }
  spdlog::info("twin up: bridge {}:{}{} mode {}", config_.host, bridge_port(),
               gateway_ ? fmt::format(", gateway {}", gateway_->port()) : std::string(),
               plant::to_string(config_.mode));
}

void TwinServer::stop() {
  if (!started_) return;
  if (gateway_) gateway_->stop();
  if (bridge_) bridge_->stop();
  {
    std::lock_guard lock(queue_mutex_);
    stopping_ = true;
  }
  queue_cv_.notify_all();
  if (tick_thread_.joinable()) tick_thread_.join();
  std::deque<std::shared_ptr<Pending>> left;
  {
    std::lock_guard lock(queue_mutex_);
    left.swap(queue_);
  }
  for (auto& p : left) {
    if (p->command) p->done.set_value(TickReply{error_reply(503, "twin stopping"), snapshot(), std::nullopt});
  }
  if (poller_) poller_->stop();
  started_ = false;
}

std::uint16_t TwinServer::bridge_port() const { return bridge_ ? bridge_->port() : 0; }

std::optional<std::uint16_t> TwinServer::http_port() const {
  if (!gateway_) return std::nullopt;
  return gateway_->port();
}

SessionId TwinServer::open_session(Transport transport) {
  SessionId id = next_session_.fetch_add(1);
  std::lock_guard lock(sessions_mutex_);
  sessions_[id] = SessionInfo{transport, false};
  return id;
}

void TwinServer::close_session(SessionId session) {
  {
    std::lock_guard lock(sessions_mutex_);
    sessions_.erase(session);
  }
  auto pending = std::make_shared<Pending>();
  pending->session = session;
  {
    std::lock_guard lock(queue_mutex_);
    if (stopping_ || !tick_thread_.joinable()) {
      world_.release(session);
      return;
    }
    queue_.push_back(std::move(pending));
  }
  queue_cv_.notify_all();
}

bool TwinServer::events_enabled(SessionId session) const {
  std::lock_guard lock(sessions_mutex_);
  auto it = sessions_.find(session);
  return it != sessions_.end() && it->second.events;
}

std::shared_ptr<const TwinSnapshot> TwinServer::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return snapshot_;
}

Reply TwinServer::execute(SessionId session, std::string_view body) {
  Command command;
  try {
    command = parse_command(body);
  } catch (const Error& e) {
    return error_reply(bridge_code(e), e.what());
  }
  return execute(session, command);
}

Reply TwinServer::execute(SessionId session, const Command& command) {
  try {
    if (!command.mutates()) return answer_from_snapshot(session, command);

    auto pending = std::make_shared<Pending>();
    pending->session = session;
    pending->command = command;
    auto future = pending->done.get_future();
    {
      std::lock_guard lock(queue_mutex_);
      if (stopping_ || !tick_thread_.joinable()) return error_reply(503, "twin not running");
      queue_.push_back(pending);
    }
    queue_cv_.notify_all();
    TickReply result = future.get();
    if (result.observe && result.reply.ok) {
      const auto& cfg = *result.observe;
      result.reply.image = render::render_first_person(result.snapshot->scene(), cfg.robot_id, cfg.obs_mode,
                                                       cfg.obs_width, cfg.obs_height);
    }
    return result.reply;
  } catch (const Error& e) {
    return error_reply(bridge_code(e), e.what());
  } catch (const std::exception& e) {
    return error_reply(500, e.what());
  }
}

Reply TwinServer::answer_from_snapshot(SessionId session, const Command& c) {
  auto snap = snapshot();
  const world::World& w = snap->world;
  switch (c.kind) {
    case CommandKind::robot_location:
      return ok(pose_text(w.robot(c.robot_id).pose));
    case CommandKind::robot_rotation:
      return ok(num(w.robot(c.robot_id).pose.yaw_deg));
    case CommandKind::robot_compass: {
      const auto& t = w.map().target;
      return ok(num(world::compass_bearing(w.robot(c.robot_id).pose, t.x_m, t.y_m)));
    }
    case CommandKind::robot_trace_csv:
      return ok(w.trace(c.robot_id).to_csv());
    case CommandKind::camera: {
      Reply r = ok("");
      r.image = render::render_first_person(snap->scene(), c.robot_id, c.mode, c.width, c.height);
      return r;
    }
    case CommandKind::topdown: {
      Reply r = ok("");
      r.image = render::render_topdown(snap->scene(), c.mode);
      return r;
    }
    case CommandKind::target_location: {
      const auto& t = w.map().target;
      return ok(fmt::format("{} {} 0", num(t.x_m), num(t.y_m)));
    }
    case CommandKind::plant_get: {
      if (auto v = snap->plant->value(c.variable)) {
        auto stale_ms = std::chrono::duration_cast<std::chrono::milliseconds>(mirror::SteadyClock::now() -
                                                                               snap->plant->sampled_at)
                            .count();
        return ok(fmt::format("{} {}", num(*v), std::max<std::int64_t>(0, stale_ms)));
      }
      if (!plant::find_variable(c.variable)) return error_reply(404, "unknown variable " + c.variable);
      return error_reply(503, "plant not mirrored yet");
    }
    case CommandKind::plant_set:
      return plant_set(c);
    case CommandKind::session_events: {
      std::lock_guard lock(sessions_mutex_);
      auto it = sessions_.find(session);
      if (it == sessions_.end()) return error_reply(404, "unknown session");
      it->second.events = c.flag;
      return ok("");
    }
    case CommandKind::sim_time:
      return ok(std::to_string(snap->t_ms));
    default:
      return error_reply(500, "command routed to the wrong path");
  }
}

Reply TwinServer::plant_set(const Command& c) {
  if (!poller_) return error_reply(503, "no plant upstream configured");
  auto reg = poller_->registry();
  const plant::VariableDescriptor* desc = nullptr;
  for (const auto& d : reg) {
    if (d.name == c.variable) desc = &d;
  }
  if (reg.empty()) {
    if (auto idx = plant::find_variable(c.variable)) desc = &plant::registry()[*idx];
  }
  if (desc == nullptr) return error_reply(404, "unknown variable " + c.variable);
  if (desc->access != plant::Access::read_write) return error_reply(403, c.variable + " is read-only");
  cache_.enqueue_write(c.variable, c.value);
  return ok(c.literal);
}

env::Episode& TwinServer::episode_for(const std::string& robot_id) {
  auto it = episodes_.find(robot_id);
  if (it == episodes_.end()) {
    env::EnvConfig cfg = config_.env_defaults;
    cfg.robot_id = robot_id;
    it = episodes_.emplace(robot_id, env::Episode(cfg)).first;
  }
  return it->second;
}

bool TwinServer::apply(Pending& p) {
  if (!p.command) {
    world_.release(p.session);
    return false;
  }
  const Command& c = *p.command;
  auto possessed = [&] {
    auto id = world_.possessed_robot(p.session);
    if (!id) throw Error(ErrorCode::forbidden, "session possesses no robot");
    return *id;
  };
  try {
    switch (c.kind) {
      case CommandKind::robot_move:
      case CommandKind::robot_rotate:
      case CommandKind::robot_altitude: {
        auto m = world_.move(p.session, c.robot_id, c.action);
        p.result.reply = ok(fmt::format("{} {}", pose_text(m.pose), m.collided ? 1 : 0));
        return false;
      }
      case CommandKind::robot_trace:
        world_.set_trace(c.robot_id, c.flag);
        p.result.reply = ok("");
        return false;
      case CommandKind::possess:
        world_.possess(p.session, c.robot_id);
        p.result.reply = ok("");
        return false;
      case CommandKind::env_reset: {
        auto id = possessed();
        episode_for(id).reset(world_);
        if (auto it = trace_sinks_.find(id); it != trace_sinks_.end()) it->second.truncate();
        p.result.reply = ok("");
        p.result.observe = episode_for(id).config();
        return false;
      }
      case CommandKind::env_step: {
        auto id = possessed();
        auto outcome = episode_for(id).step(world_, c.action_id);
        p.result.reply = ok(fmt::format("{} {} {}", num(outcome.reward), outcome.done ? 1 : 0,
                                        num(outcome.info.distance_m)));
        p.result.observe = episode_for(id).config();
        if (config_.mode == plant::ClockMode::lockstep) {
          run_tick();
          return true;
        }
        return false;
      }
      case CommandKind::sim_advance: {
        if (config_.mode != plant::ClockMode::lockstep) {
          throw Error(ErrorCode::conflict, "advance needs lockstep mode");
        }
        auto ticks = (c.ms + config_.tick_ms - 1) / config_.tick_ms;
        for (std::int64_t i = 0; i < ticks; ++i) run_tick();
        p.result.reply = ok(std::to_string(world_.time_ms()));
        return true;
      }
      default:
        throw Error(ErrorCode::bad_request, "not a mutating command");
    }
  } catch (const Error& e) {
    p.result.reply = error_reply(bridge_code(e), e.what());
    p.result.observe.reset();
  }
  return false;
}

void TwinServer::run_tick() {
  const std::int64_t dt = config_.tick_ms;
  // Robot motions are discrete and were applied with the commands.
  if (poller_) {
    if (config_.mode == plant::ClockMode::lockstep) poller_->sync_once(dt);
    plant_gen_ = cache_.current();
  }
  world_.set_time_ms(world_.time_ms() + dt);
  ++tick_count_;
  auto added = world_.record_traces(world_.time_ms());
  sync_trace_sinks(added);
  if (recorder_ && recorder_->running()) {
    render::SceneView scene{world_, *plant_gen_, cache_.stale()};
    recorder_->on_tick(scene, world_.time_ms());
    if (!recorder_->running()) spdlog::warn("top-down recorder stopped: {}", *recorder_->error());
  }
  publish();
}

void TwinServer::sync_trace_sinks(const std::vector<world::TraceRecord>& added) {
  if (!config_.record_dir) return;
  for (const auto& r : added) {
    auto it = trace_sinks_.find(r.robot_id);
    if (it == trace_sinks_.end()) {
      it = trace_sinks_.emplace(r.robot_id, world::TraceCsvSink(*config_.record_dir / ("trace_" + r.robot_id + ".csv")))
               .first;
      if (!it->second.healthy()) spdlog::warn("cannot open trace sink {}", it->second.path().string());
    }
    if (!it->second.healthy()) continue;
    if (!it->second.write(r)) spdlog::warn("trace sink {} failed; trace logging to disk disabled", it->second.path().string());
  }
}

void TwinServer::publish() {
  auto snap = std::make_shared<TwinSnapshot>(TwinSnapshot{world_, plant_gen_, cache_.stale(), world_.time_ms(), tick_count_});
  std::lock_guard lock(snapshot_mutex_);
  snapshot_ = std::move(snap);
}

void TwinServer::tick_loop_realtime() {
  const auto dt = std::chrono::milliseconds(config_.tick_ms);
  auto next = std::chrono::steady_clock::now() + dt;
  for (;;) {
    std::deque<std::shared_ptr<Pending>> batch;
    {
      std::unique_lock lock(queue_mutex_);
      queue_cv_.wait_until(lock, next, [this] { return stopping_; });
      if (stopping_) return;
      batch.swap(queue_);
    }
    auto started = std::chrono::steady_clock::now();
    for (auto& p : batch) apply(*p);
    run_tick();
    auto snap = snapshot();
    for (auto& p : batch) {
      if (!p->command) continue;
      p->result.snapshot = snap;
      p->done.set_value(std::move(p->result));
    }
    auto now = std::chrono::steady_clock::now();
    next += dt;
    if (now > next) {
      spdlog::warn("tick overrun: {} ms of work for a {} ms tick",
                   std::chrono::duration_cast<std::chrono::milliseconds>(now - started).count(), config_.tick_ms);
      next = now;
    }
  }
}

void TwinServer::tick_loop_lockstep() {
  for (;;) {
    std::shared_ptr<Pending> p;
    {
      std::unique_lock lock(queue_mutex_);
      queue_cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      p = std::move(queue_.front());
      queue_.pop_front();
    }
    bool ticked = apply(*p);
    if (!ticked) publish();
    if (!p->command) continue;
    p->result.snapshot = snapshot();
    p->done.set_value(std::move(p->result));
  }
}

void TwinServer::serve_bridge(net::Socket& socket) {
  socket.set_nodelay();
  SessionId session = open_session(Transport::tcp);
  try {
    while (auto frame = read_frame(socket)) {
      Reply reply = execute(session, frame->body);
      write_frame(socket, Frame{frame->id, reply.bridge_body()});
    }
  } catch (const std::exception& e) {
    spdlog::debug("bridge session {} closed: {}", session, e.what());
  }
  close_session(session);
}

}  // namespace npptwin::twin
