// nppbench: speed, resource and functional profiling of plantd + twind.

#include "npptwin/bench/suite.hpp"
#include "npptwin/error.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <signal.h>
#include <unistd.h>

#include <filesystem>
#include <iostream>

using namespace npptwin;

namespace {

std::filesystem::path self_dir() {
  std::error_code ec;
  auto exe = std::filesystem::read_symlink("/proc/self/exe", ec);
  return ec ? std::filesystem::current_path() : exe.parent_path();
}

}  // namespace

int main(int argc, char** argv) {
  signal(SIGPIPE, SIG_IGN);
  CLI::App app{"Profiling harness for the plant and twin services"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  bench::BenchOptions opt;
  std::string out = "bench-out";
  std::string plant_addr;
  std::string twin_addr;
  int plant_pid = 0;
  int twin_pid = 0;
  std::string plantd = (self_dir() / "plantd").string();
  std::string twind = (self_dir() / "twind").string();

  app.add_option("--out", out, "Report directory")->envname("NPPTWIN_BENCH_OUT")->capture_default_str();
  app.add_option("--plant-addr", plant_addr, "Running plantd (host:port); launched when absent")
      ->envname("NPPTWIN_PLANT_ADDR");
  app.add_option("--twin-addr", twin_addr, "Running twind bridge (host:port); launched when absent")
      ->envname("NPPTWIN_TWIN_ADDR");
  app.add_option("--plant-pid", plant_pid, "pid of an external plantd, for resource sampling");
  app.add_option("--twin-pid", twin_pid, "pid of an external twind, for resource sampling");
  app.add_option("--plantd", plantd, "plantd executable")->capture_default_str();
  app.add_option("--twind", twind, "twind executable")->capture_default_str();
  app.add_option("--reps", opt.reps, "Reps per operation")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--topdown-images", opt.topdown_images, "Captures in the top-down run")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--topdown-delay-ms", opt.topdown_delay_ms, "Delay between top-down captures")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_option("--resource-seconds", opt.resource_seconds, "Sampling window")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--sample-ms", opt.sample_period_ms, "Sampling period")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--cycles", opt.functional_cycles, "Functional restart cycles")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--runs", opt.functional_runs, "Functional runs per cycle")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--robot", opt.robot, "Robot the bench possesses")->capture_default_str();
  app.add_option("--seed", opt.seed, "Action RNG seed")->capture_default_str();

  auto* speed = app.add_subcommand("speed", "Per-operation timings");
  auto* resources = app.add_subcommand("resources", "Memory and CPU sampling with idle baseline");
  auto* functional = app.add_subcommand("functional", "Restart protocol with postconditions");
  auto* all = app.add_subcommand("all", "Everything, one report");
  CLI11_PARSE(app, argc, argv);

  const bool external = !plant_addr.empty() || !twin_addr.empty();
  auto progress = [](const std::string& line) { std::cout << line << std::endl; };
  try {
    std::unique_ptr<bench::Services> services;
    if (external) {
      if (plant_addr.empty() || twin_addr.empty()) {
        throw Error(ErrorCode::config, "--plant-addr and --twin-addr go together");
      }
      bench::ServiceEndpoints ep{net::parse_endpoint(plant_addr), net::parse_endpoint(twin_addr), {}};
      if (plant_pid > 0) ep.pids["plantd"] = plant_pid;
      if (twin_pid > 0) ep.pids["twind"] = twin_pid;
      services = std::make_unique<bench::ExternalServices>(ep);
    } else {
      std::filesystem::create_directories(out);
      services = std::make_unique<bench::ProcessServices>(plantd, twind, std::filesystem::path(out));
    }
    // Restarts need services this process owns.
    bench::ProcessServices restartable(plantd, twind, std::filesystem::path(out));

    auto report = bench::empty_report(opt);
    if (*speed || *all) bench::run_speed(*services, opt, report, progress);
    if (*resources || *all) bench::run_resources(*services, opt, report, progress);
    if (*functional || *all) bench::run_functional(restartable, opt, report, progress);
    bench::write_report(report, out);
    std::cout << bench::report_markdown(report);
    std::cout << "report written to " << out << std::endl;
    for (const auto& r : report.operations) {
      if (r.functional && r.functional->passes != r.functional->total) return 3;
    }
  } catch (const Error& e) {
    std::cerr << "nppbench: " << e.what() << std::endl;
    return 2;
  }
  return 0;
}
