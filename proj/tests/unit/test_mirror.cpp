#include "doctest.h"

#include "support/generators.hpp"
#include "support/support.hpp"

#include "npptwin/error.hpp"
#include "npptwin/mirror/cache.hpp"
#include "npptwin/mirror/client.hpp"
#include "npptwin/mirror/protocol.hpp"
#include "npptwin/mirror/server.hpp"

#include <cmath>

using namespace npptwin;
using namespace npptwin::mirror;
using npptwin::testing::PlantService;

namespace {

int error_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.wire_code();
  }
  return 0;
}

}  // namespace

TEST_CASE("parse_request examples") {
  auto r = parse_request("GET t_avg_c");
  CHECK(r.verb == Verb::get);
  CHECK(r.names == std::vector<std::string>{"t_avg_c"});

  r = parse_request("MSET rod_position=0.5 turbine_throttle=0.9");
  CHECK(r.verb == Verb::mset);
  REQUIRE(r.assignments.size() == 2);
  CHECK(r.assignments[0].name == "rod_position");
  CHECK(r.assignments[0].value == 0.5);
  CHECK(r.assignments[1].literal == "0.9");

  CHECK(parse_request("ADVANCE 50").advance_ms == 50);
  CHECK(parse_request("MODE lockstep").mode == plant::ClockMode::lockstep);
  CHECK(parse_request("SET rod_position -1.5e-3").assignments[0].value == -1.5e-3);
}

TEST_CASE("parse_request rejects malformed lines with 400") {
  for (const char* bad : {"FROB x", "", "GET", "GET a b", "get t_avg_c", "GET  t_avg_c", "GET t_avg_c ",
                          "SET rod_position", "SET rod_position abc", "SET rod_position 1e999", "MSET",
                          "MSET rod_position", "MSET rod_position=", "MSET =1", "TICK now", "MODE fast",
                          "ADVANCE -5", "ADVANCE 05", "ADVANCE 1.5", "GET T_avg", "GET t_avg_c\r", "LIST\tx",
                          "SET rod_position nan", "SET rod_position inf", "SET rod_position 0x10"}) {
    CAPTURE(bad);
    CHECK(error_code([&] { parse_request(bad); }) == 400);
  }
  std::string many = "MGET";
  for (int i = 0; i < 1001; ++i) many += " t_avg_c";
  CHECK(error_code([&] { parse_request(many); }) == 400);
}

TEST_CASE("format(parse(x)) is byte-identical on random grammatical lines") {
  npptwin::testing::Rng rng(42);
  for (int i = 0; i < 2000; ++i) {
    const std::string line = npptwin::testing::random_mirror_line(rng);
    CAPTURE(line);
    REQUIRE(format_request(parse_request(line)) == line);
  }
}

TEST_CASE("response formatting round-trips values exactly") {
  npptwin::testing::Rng rng(5);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  std::vector<double> values;
  for (int i = 0; i < 200; ++i) values.push_back(u(rng) * std::pow(10.0, npptwin::testing::pick(rng, -12, 12)));
  const auto resp = parse_response(format_ok(values));
  REQUIRE(resp.ok);
  REQUIRE(resp.values.size() == values.size());
  for (std::size_t i = 0; i < values.size(); ++i) CHECK(resp.values[i] == values[i]);

  const auto err = parse_response(format_error(403, "core_power_mw"));
  CHECK_FALSE(err.ok);
  CHECK(err.code == 403);
  CHECK(err.detail == "core_power_mw");
}

TEST_CASE("handle_line responses") {
  plant::Plant p({}, npptwin::testing::nominal_state());
  plant::PlantRunner runner(p, 50, plant::ClockMode::realtime);
  CHECK(handle_line(p, runner, "SET core_power_mw 5") == "ERR 403 core_power_mw");
  CHECK(handle_line(p, runner, "GET bogus") == "ERR 404 bogus");
  CHECK(handle_line(p, runner, "ADVANCE 50") == "ERR 409 mode");
  CHECK(handle_line(p, runner, "FROB x").rfind("ERR 400 ", 0) == 0);
  CHECK(handle_line(p, runner, "SET rod_position 2.0") == "OK 1");
  CHECK(handle_line(p, runner, "MSET rod_position=0.25 turbine_throttle=-1") == "OK 0.25 0");
  CHECK(handle_line(p, runner, "MODE lockstep") == "OK 0");
  CHECK(handle_line(p, runner, "ADVANCE 50") == "OK 50");
  CHECK(handle_line(p, runner, "ADVANCE 50") == "OK 100");
  CHECK(handle_line(p, runner, "TICK") == "OK 100");

  const std::string list = handle_line(p, runner, "LIST");
  const auto& reg = plant::registry();
  CHECK(list.rfind(fmt::format("OK {}\n", reg.size()), 0) == 0);
  CHECK(list.find("\nsg1_level_m m ro 0 25\n") != std::string::npos);
  CHECK(list.find("\nrod_position fraction rw 0 1\n") != std::string::npos);
  CHECK(list.substr(list.size() - 4) == "\nEND");
}

TEST_CASE("MGET is a single-snapshot read") {
  PlantService svc(plant::ClockMode::realtime, npptwin::testing::nominal_state(), 1);
  MirrorClient client(svc.endpoint());
  const std::vector<std::string> names{"t_hot_c", "t_avg_c", "t_cold_c", "probe_00_c", "probe_01_c", "sim_time_ms"};
  for (int i = 0; i < 200; ++i) {
    if (i % 10 == 0) client.set("rod_position", (i % 20 == 0) ? 0.5 : 1.0);
    const auto v = client.mget(names);
    // t_hot and t_cold are symmetric about t_avg at any single boundary.
    REQUIRE(v[0] - v[1] == doctest::Approx(v[1] - v[2]).epsilon(1e-9));
    REQUIRE(v[3] <= v[4]);
  }
}

TEST_CASE("client against a live server") {
  PlantService svc;
  MirrorClient client(svc.endpoint());
  const auto reg = client.list();
  CHECK(reg.size() == plant::registry().size());
  for (std::size_t i = 0; i < reg.size(); ++i) {
    CHECK(reg[i].name == plant::registry()[i].name);
    CHECK(reg[i].unit == plant::registry()[i].unit);
    CHECK(reg[i].access == plant::registry()[i].access);
    CHECK(reg[i].min == plant::registry()[i].min);
    CHECK(reg[i].max == plant::registry()[i].max);
  }
  CHECK(client.get("core_power_mw") == doctest::Approx(3000.0));
  CHECK(client.set("rod_position", 2.0) == 1.0);
  CHECK(error_code([&] { client.set("core_power_mw", 5); }) == 403);
  CHECK(error_code([&] { client.get("bogus"); }) == 404);
  CHECK(client.mode(plant::ClockMode::lockstep) == 0);
  CHECK(client.advance(50) == 50);
  CHECK(client.advance(50) == 100);
  CHECK(client.tick() == 100);
  // The connection survives errors.
  CHECK(client.request_line("FROB x").rfind("ERR 400", 0) == 0);
  CHECK(client.tick() == 100);
}

TEST_CASE("over-long lines are refused and the connection closed") {
  PlantService svc;
  net::Socket s = net::connect_tcp(svc.endpoint());
  std::string line(kMaxLineBytes + 10, 'a');
  line += "\n";
  s.write_all(line);
  net::LineReader reader(s, kMaxLineBytes);
  auto resp = reader.read_line();
  REQUIRE(resp);
  CHECK(resp->rfind("ERR 400", 0) == 0);
  CHECK_FALSE(reader.read_line());
}

TEST_CASE("poller keeps the cache in sync and flushes writes") {
  PlantService svc;
  MirrorCache cache;
  PollerConfig cfg;
  cfg.endpoint = svc.endpoint();
  MirrorPoller poller(cfg, cache);
  CHECK(poller.set_mode(plant::ClockMode::lockstep));
  REQUIRE(poller.sync_once());
  auto g1 = cache.current();
  CHECK(g1->values.size() == plant::registry().size());
  CHECK_FALSE(cache.stale());

  cache.enqueue_write("rod_position", 0.5);
  REQUIRE(poller.sync_once(50));
  auto g2 = cache.current();
  CHECK(g2->generation > g1->generation);
  CHECK(*g2->value("rod_position") == 0.5);
  CHECK(g2->sim_time_ms == 50);
  CHECK(*g2->value("sim_time_ms") == 50.0);
  CHECK(cache.pending_writes() == 0);
}

TEST_CASE("poller survives an outage and recovers") {
  MirrorCache cache;
  auto svc = std::make_unique<PlantService>(plant::ClockMode::realtime);
  const auto ep = svc->endpoint();
  PollerConfig cfg;
  cfg.endpoint = ep;
  cfg.period = std::chrono::milliseconds(20);
  cfg.io_timeout = std::chrono::milliseconds(500);
  MirrorPoller poller(cfg, cache);
  poller.start();
  REQUIRE(npptwin::testing::wait_until([&] { return cache.current()->generation > 0 && !cache.stale(); }));

  svc.reset();
  REQUIRE(npptwin::testing::wait_until([&] { return cache.stale(); }));
  const auto held = cache.current();
  cache.enqueue_write("rod_position", 0.75);
  std::this_thread::sleep_for(std::chrono::milliseconds(300));
  CHECK(cache.current() == held);  // last snapshot kept
  CHECK(cache.staleness_ms() >= 300);
  CHECK(poller.failures() > 0);
  CHECK(cache.pending_writes() == 1);  // not lost

  // Same port: plantd restarting in place.
  plant::Plant p({}, npptwin::testing::nominal_state());
  plant::PlantRunner runner(p, 50, plant::ClockMode::realtime);
  runner.start();
  MirrorServer server(p, runner, "127.0.0.1", ep.port);
  server.start();
  REQUIRE(npptwin::testing::wait_until([&] { return !cache.stale(); }, std::chrono::seconds(8)));
  REQUIRE(npptwin::testing::wait_until([&] { return cache.current()->value("rod_position") == 0.75; }));
  CHECK(p.read_var("rod_position") == 0.75);
  poller.stop();
  server.stop();
  runner.stop();
}

TEST_CASE("backoff doubles up to the cap") {
  MirrorCache cache;
  PollerConfig cfg;
  {
    net::Listener l("127.0.0.1", 0);
    cfg.endpoint = {"127.0.0.1", l.port()};
  }  // closed: connections are refused
  cfg.min_backoff = std::chrono::milliseconds(100);
  cfg.max_backoff = std::chrono::milliseconds(400);
  MirrorPoller poller(cfg, cache);
  CHECK_FALSE(poller.sync_once());
  CHECK(poller.current_backoff() == std::chrono::milliseconds(100));
  std::vector<long> seen;
  for (int i = 0; i < 4; ++i) {
    std::this_thread::sleep_for(poller.current_backoff() + std::chrono::milliseconds(20));
    CHECK_FALSE(poller.sync_once());
    seen.push_back(static_cast<long>(poller.current_backoff().count()));
  }
  CHECK(seen == std::vector<long>{200, 400, 400, 400});
  CHECK(cache.stale());
}
