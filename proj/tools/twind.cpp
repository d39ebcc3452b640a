// twind: world, renderer and bridge, mirroring a plantd.

#include "common.hpp"

#include "npptwin/error.hpp"
#include "npptwin/twin/server.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

using namespace npptwin;

int main(int argc, char** argv) {
  CLI::App app{"Digital twin server"};
  twin::TwinConfig cfg;
  std::uint16_t http_port = 8080;
  std::string plant_addr = "127.0.0.1:9100";
  std::string map_path;
  std::string mode = "rt";
  std::string record_dir;
  std::string web_root;
  std::int64_t poll_ms = 100;
  std::string log_level = "info";
  app.add_option("--host", cfg.host, "Listen address")->envname("NPPTWIN_HOST")->capture_default_str();
  app.add_option("--bridge-port", cfg.bridge_port, "Framed bridge port")
      ->envname("NPPTWIN_BRIDGE_PORT")
      ->capture_default_str();
  app.add_option("--http-port", http_port, "Browser gateway port; 0 disables it")
      ->envname("NPPTWIN_HTTP_PORT")
      ->capture_default_str();
  app.add_option("--plant-addr", plant_addr, "plantd host:port; 'none' runs without a plant")
      ->envname("NPPTWIN_PLANT_ADDR")
      ->capture_default_str();
  app.add_option("--map", map_path, "Map JSON (default: bundled plant map)")->envname("NPPTWIN_MAP");
  app.add_option("--tick-ms", cfg.tick_ms, "Tick period (ms)")
      ->envname("NPPTWIN_TICK_MS")
      ->check(CLI::Range(1, 1000))
      ->capture_default_str();
  app.add_option("--mode", mode, "Clock mode")
      ->envname("NPPTWIN_MODE")
      ->check(CLI::IsMember({"rt", "lockstep"}))
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "Swarm placement seed")->envname("NPPTWIN_SEED")->capture_default_str();
  app.add_option("--record-dir", record_dir, "Top-down frames and trace CSVs go here")->envname("NPPTWIN_RECORD_DIR");
  app.add_option("--topdown-interval-ms", cfg.topdown_interval_ms, "Top-down capture interval")
      ->envname("NPPTWIN_TOPDOWN_INTERVAL_MS")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--swarm", cfg.swarm_size, "Wheeled robots to add")
      ->envname("NPPTWIN_SWARM")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_option("--swarm-zone", cfg.swarm_zone, "Zone for the swarm")
      ->envname("NPPTWIN_SWARM_ZONE")
      ->capture_default_str();
  app.add_option("--poll-ms", poll_ms, "Mirror poll period (ms)")
      ->envname("NPPTWIN_POLL_MS")
      ->check(CLI::Range(1, 10000))
      ->capture_default_str();
  app.add_option("--web-root", web_root, "Static files for the browser gateway")->envname("NPPTWIN_WEB_ROOT");
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error")->envname("NPPTWIN_LOG_LEVEL");
  CLI11_PARSE(app, argc, argv);
  tools::set_log_level(log_level);

  try {
    cfg.mode = *plant::parse_clock_mode(mode);
    cfg.http_port = http_port == 0 ? std::nullopt : std::optional<std::uint16_t>(http_port);
    cfg.plant_addr = plant_addr == "none" ? std::nullopt : std::optional(net::parse_endpoint(plant_addr));
    cfg.map_path = map_path;
    if (!record_dir.empty()) cfg.record_dir = record_dir;
    if (!web_root.empty()) cfg.web_root = web_root;
    cfg.poll_period = std::chrono::milliseconds(poll_ms);

    const auto signals = tools::block_shutdown_signals();
    twin::TwinServer server(cfg);
    server.start();
    tools::wait_for_shutdown(signals);
    server.stop();
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
