#include "doctest.h"

#include "support/support.hpp"

#include "npptwin/bench/process.hpp"
#include "npptwin/bench/sampler.hpp"
#include "npptwin/bench/stats.hpp"
#include "npptwin/bench/suite.hpp"
#include "npptwin/error.hpp"
#include "npptwin/twin/server.hpp"

#include <signal.h>
#include <unistd.h>

#include <fstream>
#include <numeric>

using namespace npptwin;
using namespace npptwin::bench;

namespace {

// plant stand-in + twin in this process. A fresh pair per start().
class InProcessServices : public Services {
public:
  std::function<void(testing::FakeMirrorBackend&, int)> on_start;

  ServiceEndpoints start() override {
    stop();
    fake_ = std::make_unique<testing::FakeMirrorBackend>();
    if (on_start) on_start(*fake_, starts_);
    ++starts_;
    auto cfg = testing::twin_config(fake_->endpoint(), plant::ClockMode::realtime);
    twin_ = std::make_unique<twin::TwinServer>(cfg);
    twin_->start();
    twin::BridgeClient probe({"127.0.0.1", twin_->bridge_port()});
    testing::wait_until([&] { return probe.call("vget /plant/sim_time_ms").ok; });
    return {fake_->endpoint(), {"127.0.0.1", twin_->bridge_port()}, pids};
  }
  void stop() override {
    if (twin_) twin_->stop();
    twin_.reset();
    fake_.reset();
  }
  bool restartable() const override { return true; }

  std::map<std::string, pid_t> pids;

private:
  int starts_ = 0;
  std::unique_ptr<testing::FakeMirrorBackend> fake_;
  std::unique_ptr<twin::TwinServer> twin_;
};

BenchOptions quick_options() {
  BenchOptions o;
  o.reps = 5;
  o.topdown_images = 3;
  o.topdown_delay_ms = 20;
  o.resource_seconds = 2;
  o.sample_period_ms = 100;
  o.functional_cycles = 3;
  o.functional_runs = 4;
  return o;
}

}  // namespace

TEST_CASE("percentiles by linear interpolation") {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  CHECK(percentile(v, 0.5) == doctest::Approx(50.5));
  CHECK(percentile(v, 0.95) == doctest::Approx(95.05));
  CHECK(percentile(v, 0.0) == 1.0);
  CHECK(percentile(v, 1.0) == 100.0);
  CHECK(percentile({7.0}, 0.95) == 7.0);
  CHECK(percentile({1.0, 3.0}, 0.5) == 2.0);
  const auto s = summarize({4.0, 1.0, 3.0, 2.0});
  CHECK(s.runs == 4);
  CHECK(s.mean_ms == 2.5);
  CHECK(s.p50_ms == 2.5);
  CHECK(s.max_ms == 4.0);
  CHECK_THROWS_AS(summarize(std::vector<double>{}), Error);
}

TEST_CASE("timing self-test: a 20 ms busy-wait measures 20 ms") {
  std::vector<double> samples;
  for (int i = 0; i < 20; ++i) samples.push_back(time_ms([] { busy_wait(std::chrono::milliseconds(20)); }));
  const auto s = summarize(samples);
  CHECK(s.mean_ms == doctest::Approx(20.0).epsilon(0.1));
  CHECK(std::abs(s.mean_ms - 20.0) <= 2.0);
  CHECK(s.max_ms >= s.mean_ms);
}

TEST_CASE("proc readings and the sampler") {
  REQUIRE(proc_sampling_supported());
  const auto r = read_proc(getpid());
  REQUIRE(r);
  CHECK(r->rss_bytes > 0);
  CHECK_FALSE(read_proc(999999999));

  ResourceSampler sampler({{"self", getpid()}}, std::chrono::milliseconds(50));
  sampler.set_label("busy");
  sampler.start();
  while (sampler.instants() < 6) busy_wait(std::chrono::milliseconds(5));
  sampler.set_label("idle");
  const auto until = sampler.instants() + 4;
  while (sampler.instants() < until) std::this_thread::sleep_for(std::chrono::milliseconds(5));
  const auto samples = sampler.stop();
  REQUIRE(samples.size() >= 10);
  std::vector<ResourceSample> busy, idle;
  for (const auto& s : samples) (s.label == "busy" ? busy : idle).push_back(s);
  const auto b = summarize(busy);
  const auto i = summarize(idle);
  CHECK(b.cpu_mean_pct > 50.0);
  CHECK(i.cpu_mean_pct < b.cpu_mean_pct);
  CHECK(b.cpu_max_pct >= b.cpu_mean_pct);
  CHECK(b.rss_max_bytes >= b.rss_mean_bytes);
}

TEST_CASE("child processes") {
  ChildProcess sleeper("/bin/sleep", {"30"});
  CHECK(sleeper.running());
  CHECK(sleeper.terminate() == -SIGTERM);
  CHECK_FALSE(sleeper.running());

  ChildProcess quick("/bin/sh", {"-c", "exit 7"});
  CHECK_THROWS_AS(wait_for_port({"127.0.0.1", free_port()}, std::chrono::seconds(5), &quick), Error);
  CHECK(quick.exit_status() == 7);
  CHECK_THROWS_AS(wait_for_port({"127.0.0.1", free_port()}, std::chrono::milliseconds(100)), Error);
  CHECK_THROWS_AS(ChildProcess("/nonexistent/binary", {}), Error);
}

TEST_CASE("report structure") {
  auto report = empty_report(quick_options());
  REQUIRE(report.operations.size() == 8);
  report.operations[0].speed = summarize({1.0, 2.0});
  report.operations[1].functional = FunctionalResult{9, 10, {{3, 4, "value, \"quoted\""}}};
  const auto csv = report_csv(report);
  CHECK(csv.rfind(std::string(kReportCsvHeader) + "\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);
  CHECK(csv == report_csv(report));
  CHECK(failures_csv(report) == std::string(kFailuresCsvHeader) + "\nmget100,3,4,\"value, \"\"quoted\"\"\"\n");
  const auto md = report_markdown(report);
  CHECK(md.find("Failed (9/10)") != std::string::npos);
  CHECK(md.find("18.16 ms") != std::string::npos);
  CHECK(md.find("2.37 ms") != std::string::npos);

  testing::TempDir dir;
  write_report(report, dir.path());
  std::ifstream f(dir.path() / "report.csv");
  std::stringstream ss;
  ss << f.rdbuf();
  CHECK(ss.str() == csv);
  write_report(report, dir.path());
  std::ifstream g(dir.path() / "report.csv");
  std::stringstream ss2;
  ss2 << g.rdbuf();
  CHECK(ss2.str() == csv);
}

TEST_CASE("speed, resources and functional against in-process services") {
  InProcessServices services;
  services.pids = {{"self", getpid()}};
  auto opt = quick_options();
  auto report = empty_report(opt);
  run_speed(services, opt, report);
  for (const auto& r : report.operations) {
    CAPTURE(r.spec.key);
    REQUIRE(r.speed);
    CHECK(r.speed->runs == (r.spec.key == "topdown" ? 3 : 5));
    CHECK(r.speed->max_ms >= r.speed->p95_ms);
    CHECK(r.speed->p95_ms >= r.speed->p50_ms);
  }
  const auto& top = report.operations.back();
  REQUIRE(top.topdown_total_ms);
  CHECK(*top.topdown_total_ms >= 3 * 20.0);
  CHECK(top.speed->mean_ms < *top.topdown_total_ms / 3);

  run_resources(services, opt, report);
  REQUIRE(report.idle);
  REQUIRE(report.active);
  CHECK(report.idle->combined().samples == 20);
  CHECK(report.active->combined().samples == 20);
  for (const auto& r : report.operations) {
    REQUIRE(r.resources);
    CHECK(r.resources->samples >= 2);
  }

  services.pids.clear();  // one pid for every launch here
  run_functional(services, opt, report);
  for (const auto& r : report.operations) {
    CAPTURE(r.spec.key);
    REQUIRE(r.functional);
    CHECK(r.functional->passes == 12);
    CHECK(r.functional->total == 12);
  }
}

TEST_CASE("an injected backend fault shows up with its indices") {
  InProcessServices services;
  const auto first = plant::registry().front();
  services.on_start = [&](testing::FakeMirrorBackend& fake, int start) {
    // Launches 0-2 belong to mset100; the second mget100 cycle is launch 4.
    if (start == 4) fake.set(first.name, first.max + 1.0);
  };
  auto opt = quick_options();
  auto report = empty_report(opt);
  run_functional(services, opt, report);
  const auto& mget = report.operations[1];
  REQUIRE(mget.spec.key == "mget100");
  CHECK(mget.functional->passes == 8);
  CHECK(mget.functional->total == 12);
  REQUIRE(mget.functional->failures.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(mget.functional->failures[static_cast<std::size_t>(i)].cycle == 1);
    CHECK(mget.functional->failures[static_cast<std::size_t>(i)].run == i);
    CHECK(mget.functional->failures[static_cast<std::size_t>(i)].detail.find(first.name) != std::string::npos);
  }
}

TEST_CASE("services that never restart fail the freshness check") {
  InProcessServices inner;
  auto ep = inner.start();
  ExternalServices external(ep);
  auto opt = quick_options();
  opt.functional_cycles = 2;
  opt.functional_runs = 2;
  auto report = empty_report(opt);
  run_functional(external, opt, report);
  const auto& f = *report.operations[0].functional;
  CHECK(f.passes == 2);
  CHECK(f.total == 4);
  REQUIRE(f.failures.size() == 2);
  CHECK(f.failures[0].detail.find("not restarted") != std::string::npos);
  inner.stop();
}
