// plantd: the plant model behind the mirror protocol.

#include "common.hpp"

#include "npptwin/error.hpp"
#include "npptwin/mirror/server.hpp"
#include "npptwin/plant/model.hpp"
#include "npptwin/plant/plant.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

using namespace npptwin;

int main(int argc, char** argv) {
  CLI::App app{"Plant model served over the mirror protocol"};
  std::string host = "127.0.0.1";
  std::uint16_t port = 9100;
  std::int64_t tick_ms = 50;
  std::string mode = "rt";
  std::uint64_t seed = 0;
  std::string initial = "cold";
  std::string log_level = "info";
  app.add_option("--host", host, "Listen address")->envname("NPPTWIN_HOST")->capture_default_str();
  app.add_option("--port", port, "Mirror port")->envname("NPPTWIN_PORT")->capture_default_str();
  app.add_option("--tick-ms", tick_ms, "Integration step (ms)")
      ->envname("NPPTWIN_TICK_MS")
      ->check(CLI::Range(1, 1000))
      ->capture_default_str();
  app.add_option("--mode", mode, "Clock mode")
      ->envname("NPPTWIN_MODE")
      ->check(CLI::IsMember({"rt", "lockstep"}))
      ->capture_default_str();
  app.add_option("--seed", seed, "Accepted for symmetry; the plant is deterministic")
      ->envname("NPPTWIN_SEED")
      ->capture_default_str();
  app.add_option("--initial", initial, "Initial condition: hot standby or the nominal fixed point")
      ->envname("NPPTWIN_INITIAL")
      ->check(CLI::IsMember({"cold", "nominal"}))
      ->capture_default_str();
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error")->envname("NPPTWIN_LOG_LEVEL");
  CLI11_PARSE(app, argc, argv);
  tools::set_log_level(log_level);

  const auto signals = tools::block_shutdown_signals();
  try {
    plant::Plant plant({}, initial == "nominal" ? plant::solve_steady_state(plant::PlantInputs{})
                                                : plant::cold_start_state());
    plant::PlantRunner runner(plant, tick_ms, *plant::parse_clock_mode(mode));
    mirror::MirrorServer server(plant, runner, host, port);
    runner.start();
    server.start();
    spdlog::info("plantd on {}:{} mode {} tick {} ms initial {} seed {} (unused)", host, server.port(), mode, tick_ms,
                 initial, seed);
    tools::wait_for_shutdown(signals);
    server.stop();
    runner.stop();
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
