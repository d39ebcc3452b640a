#include "doctest.h"

#include "support/support.hpp"

#include "npptwin/error.hpp"
#include "npptwin/world/world.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

using namespace npptwin;
using namespace npptwin::world;
using npptwin::testing::make_map;
using npptwin::testing::map_document;

namespace {

RobotState robot_at(RobotKind kind, double x, double y, double yaw = 0.0, double z = 0.0) {
  RobotState r;
  r.id = "t";
  r.kind = kind;
  r.pose = {x, y, z, yaw};
  return r;
}

std::vector<MapIssue> issues_of(const nlohmann::json& doc) {
  try {
    load_map(doc, nullptr);
  } catch (const MapValidationError& e) {
    return e.issues();
  }
  return {};
}

}  // namespace

TEST_CASE("default map inventory") {
  const WorldMap m = load_default_map();
  CHECK(m.name == "npp_default");
  REQUIRE(m.zones.size() == 4);
  for (const char* z : {"reactor_building", "turbine_hall", "cooling_water", "power_area"}) CHECK(m.zone(z));

  // An open FLAT rectangle of at least 30x20 inside the turbine hall.
  const CellRect hall = m.zone("turbine_hall")->rect;
  bool found = false;
  for (int y = hall.y; y + 20 <= hall.y + hall.h && !found; ++y) {
    for (int x = hall.x; x + 30 <= hall.x + hall.w && !found; ++x) {
      bool all_flat = true;
      for (int r = y; r < y + 20 && all_flat; ++r) {
        for (int c = x; c < x + 30 && all_flat; ++c) all_flat = m.cell(c, r).terrain == Terrain::flat;
      }
      found = all_flat;
    }
  }
  CHECK(found);

  // Every WATER cell reads the circulating-water outlet or a condenser probe.
  int bound_to_cw = 0;
  for (int r = 0; r < m.height; ++r) {
    for (int c = 0; c < m.width; ++c) {
      const Cell& cell = m.cell(c, r);
      if (cell.terrain != Terrain::water) continue;
      REQUIRE(cell.binding >= 0);
      const auto& var = m.thermal_bindings[static_cast<std::size_t>(cell.binding)].variable;
      CHECK((var == "cond_cw_out_c" || var.rfind("probe_", 0) == 0));
      if (var == "cond_cw_out_c") ++bound_to_cw;
    }
  }
  CHECK(bound_to_cw > 0);

  // The valve sits on a passable cell next to SG feed piping.
  REQUIRE(m.interactions.size() == 1);
  const Interaction& valve = m.interactions[0];
  CHECK(valve.variable == "sg1_feed_valve");
  CHECK(m.cell(valve.col, valve.row).terrain == Terrain::flat);
  int adjacent_walls = 0;
  for (auto [dc, dr] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
    if (m.cell(valve.col + dc, valve.row + dr).terrain == Terrain::wall) ++adjacent_walls;
  }
  CHECK(adjacent_walls >= 1);

  std::set<RobotKind> kinds;
  for (const auto& s : m.spawns) kinds.insert(s.kind);
  CHECK(kinds.size() == 4);
}

TEST_CASE("map validation names rows and columns") {
  auto doc = map_document({"FFF", "FWF", "FFF"});
  CHECK(issues_of(doc).empty());

  auto bad_code = map_document({"FFF", "FXF", "FFF"});
  auto issues = issues_of(bad_code);
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].row == 1);
  CHECK(issues[0].col == 1);

  auto short_row = map_document({"FFF", "FF", "FFF"});
  issues = issues_of(short_row);
  REQUIRE_FALSE(issues.empty());
  CHECK(issues[0].row == 1);

  auto wrong_height = map_document({"FFF", "FFF"});
  wrong_height["height"] = 3;
  CHECK_FALSE(issues_of(wrong_height).empty());

  const auto bogus = map_document({"FFF"}, {{"thermal_bindings", {{{"rect", {0, 0, 1, 1}}, {"variable", "bogus"}}}}});
  const std::set<std::string> known{"cond_cw_out_c"};
  try {
    load_map(bogus, &known);
    FAIL("expected a validation error");
  } catch (const MapValidationError& e) {
    REQUIRE(e.issues().size() == 1);
    CHECK(e.issues()[0].message.find("bogus") != std::string::npos);
    CHECK(e.issues()[0].row == 0);
    CHECK(e.issues()[0].col == 0);
  }
  // Against the plant registry through the one-argument overload.
  CHECK_THROWS_AS(load_map(bogus), MapValidationError);

  auto zone_out = map_document({"FFF"}, {{"zones", {{{"name", "z"}, {"rect", {2, 0, 2, 1}}}}}});
  CHECK_FALSE(issues_of(zone_out).empty());
}

TEST_CASE("degenerate 1x1 world") {
  const auto doc = map_document({"F"}, {{"spawns", {{{"name", "r1"}, {"x", 0.5}, {"y", 0.5}}}},
                                        {"target", {{"x", 0.5}, {"y", 0.5}}}});
  auto m = std::make_shared<const WorldMap>(load_map(doc, nullptr));
  World w(m);
  CHECK(w.robot("r1").pose.x_m == 0.5);
  CHECK(compass_bearing(w.robot("r1").pose, 0.5, 0.5) == 0.0);
  auto res = w.apply("r1", Action::forward);
  CHECK(res.collided);
  CHECK(res.pose == w.robot("r1").pose);
}

TEST_CASE("map document round trip") {
  const WorldMap m = load_default_map();
  const WorldMap again = load_map(to_document(m), nullptr);
  CHECK(again.width == m.width);
  CHECK(again.height == m.height);
  for (std::size_t i = 0; i < m.cells.size(); ++i) {
    REQUIRE(again.cells[i].terrain == m.cells[i].terrain);
    REQUIRE(again.cells[i].material == m.cells[i].material);
    REQUIRE(again.cells[i].base_temp_c == m.cells[i].base_temp_c);
    REQUIRE(again.cells[i].binding == m.cells[i].binding);
  }
}

TEST_CASE("apply_move examples") {
  auto m = make_map({"FFFS", "FFFF"});
  auto r = robot_at(RobotKind::wheeled, 0.5, 0.5);
  auto res = apply_move(r, Action::forward, *m);
  CHECK_FALSE(res.collided);
  CHECK(res.pose.x_m == 1.5);
  CHECK(res.pose.y_m == 0.5);

  r.pose.x_m = 2.5;
  res = apply_move(r, Action::forward, *m);
  CHECK(res.collided);
  CHECK(res.pose == r.pose);

  CHECK_THROWS_AS(apply_move(r, Action::up, *m), Error);

  auto spin = robot_at(RobotKind::wheeled, 0.5, 0.5, 30.0);
  for (int i = 0; i < 24; ++i) spin.pose = apply_move(spin, Action::turn_left, *m).pose;
  CHECK(spin.pose.yaw_deg == 30.0);
}

TEST_CASE("terrain gating per locomotion class") {
  auto m = make_map({"FUSW~"});
  struct Case {
    RobotKind kind;
    std::array<bool, 5> enter;
  };
  const std::vector<Case> cases{{RobotKind::wheeled, {true, false, false, false, false}},
                                {RobotKind::bipedal, {true, false, true, false, false}},
                                {RobotKind::quadruped, {true, true, false, false, false}},
                                {RobotKind::aerial, {true, true, true, false, true}}};
  const std::array<Terrain, 5> terrains{Terrain::flat, Terrain::uneven, Terrain::stairs, Terrain::wall, Terrain::water};
  for (const auto& c : cases) {
    for (std::size_t i = 0; i < 5; ++i) {
      CAPTURE(to_string(c.kind));
      CAPTURE(i);
      CHECK(can_enter(c.kind, terrains[i]) == c.enter[i]);
    }
  }
}

TEST_CASE("aerial altitude is bounded") {
  auto m = make_map({"FF"});
  auto r = robot_at(RobotKind::aerial, 0.5, 0.5);
  CHECK(apply_move(r, Action::down, *m).collided);
  for (int i = 0; i < 20; ++i) {
    auto res = apply_move(r, Action::up, *m);
    REQUIRE_FALSE(res.collided);
    r.pose = res.pose;
  }
  CHECK(r.pose.z_m == 10.0);
  CHECK(apply_move(r, Action::up, *m).collided);
  auto fwd = apply_move(r, Action::forward, *m);
  CHECK(fwd.pose.z_m == 10.0);
}

TEST_CASE("yaw algebra") {
  auto m = make_map({"F"});
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const double start = wrap_degrees(15.0 * static_cast<int>(rng() % 24));
    auto r = robot_at(RobotKind::wheeled, 0.5, 0.5, start);
    const int k = static_cast<int>(rng() % 40);
    std::vector<Action> seq;
    for (int i = 0; i < k; ++i) {
      seq.push_back(Action::turn_left);
      seq.push_back(Action::turn_right);
    }
    std::shuffle(seq.begin(), seq.end(), rng);
    for (auto a : seq) r.pose = apply_move(r, a, *m).pose;
    REQUIRE(r.pose.yaw_deg == start);
    REQUIRE(r.pose.yaw_deg > -180.0);
    REQUIRE(r.pose.yaw_deg <= 180.0);
  }
  CHECK(wrap_degrees(-180.0) == 180.0);
  CHECK(wrap_degrees(540.0) == 180.0);
  CHECK(wrap_degrees(-195.0) == 165.0);
}

TEST_CASE("compass bearing") {
  CHECK(compass_bearing({0, 0, 0, 0}, 5, 0) == 0.0);
  CHECK(compass_bearing({0, 0, 0, 0}, 0, 5) == doctest::Approx(90.0));
  CHECK(compass_bearing({0, 0, 0, 0}, 0, -5) == doctest::Approx(-90.0));
  const double b = compass_bearing({0, 0, 0, 179}, -1, -0.0001);
  CHECK(b > -180.0);
  CHECK(b <= 180.0);
  // atan2(-0.0001, -1) ≈ -179.9943°; minus 179 wraps to about +1.0057.
  CHECK(b == doctest::Approx(std::atan2(-0.0001, -1.0) * 180.0 / M_PI - 179.0 + 360.0));
  CHECK(compass_bearing({3, 4, 0, 45}, 3, 4) == 0.0);

  // Antisymmetry: target vs its reflection through the robot.
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 500; ++i) {
    const Pose p{u(rng), u(rng), 0.0, 15.0 * static_cast<int>(rng() % 24 - 12)};
    const double tx = u(rng), ty = u(rng);
    const double a = compass_bearing(p, tx, ty);
    const double b2 = compass_bearing(p, 2 * p.x_m - tx, 2 * p.y_m - ty);
    double diff = std::fmod(std::abs(a - b2), 360.0);
    REQUIRE(std::abs(diff - 180.0) < 1e-9);
  }
}

TEST_CASE("thermal_at reads bindings and static temperatures") {
  auto m = make_map({"~WW"}, {{"thermal_bindings", {{{"rect", {0, 0, 1, 1}}, {"variable", "cond_cw_out_c"}}}},
                              {"static_temps", {{{"rect", {1, 0, 1, 1}}, {"temp_c", 42.0}}}}});
  mirror::CacheGeneration gen;
  gen.values["cond_cw_out_c"] = 27.5;
  auto t = thermal_at(*m, gen, false, 0, 0);
  CHECK(t.celsius == 27.5);
  CHECK_FALSE(t.stale);
  gen.values["cond_cw_out_c"] = 30.5;
  CHECK(thermal_at(*m, gen, true, 0, 0).celsius == 30.5);
  CHECK(thermal_at(*m, gen, true, 0, 0).stale);
  CHECK(thermal_at(*m, gen, false, 1, 0).celsius == 42.0);
  CHECK_FALSE(thermal_at(*m, gen, false, 2, 0).celsius);
  // Bound cell with no sample yet: no temperature.
  CHECK_FALSE(thermal_at(*m, mirror::CacheGeneration{}, true, 0, 0).celsius);
}

TEST_CASE("trace recording") {
  auto m = make_map({"FFFFFFFFFF"}, {{"spawns", {{{"name", "r1"}, {"x", 0.5}, {"y", 0.5}}}}});
  World w(m);
  w.set_trace("r1", true);
  for (int i = 1; i <= 100; ++i) w.record_traces(i * 50);
  const auto recs = w.trace("r1").records();
  REQUIRE(recs.size() == 100);
  for (std::size_t i = 1; i < recs.size(); ++i) {
    CHECK(recs[i].t_ms - recs[i - 1].t_ms == 50);
    CHECK(recs[i].x_m == recs[0].x_m);
  }
  w.set_trace("r1", false);
  for (int i = 101; i <= 110; ++i) w.record_traces(i * 50);
  CHECK(w.trace("r1").size() == 100);

  const std::string csv = w.trace("r1").to_csv();
  CHECK(csv.rfind("t_ms,robot_id,x_m,y_m,z_m,yaw_deg\n50,r1,0.500,0.500,0.000,0.000\n", 0) == 0);
  CHECK(csv.find('\r') == std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 101);
}

TEST_CASE("trace csv formatting") {
  CHECK(trace_csv_row({1234, "a", 1.0, -0.0001, 2.5, -90.0}) == "1234,a,1.000,0.000,2.500,-90.000");
  CHECK(trace_csv_row({0, "b", 0.0005, 1.2344999, 0, 180}) == "0,b,0.001,1.234,0.000,180.000");
}

TEST_CASE("trace log copies are independent snapshots") {
  TraceLog log;
  for (int i = 0; i < 1000; ++i) log.append({i, "r", 0, 0, 0, 0});
  TraceLog copy = log;
  for (int i = 1000; i < 1300; ++i) log.append({i, "r", 0, 0, 0, 0});
  CHECK(copy.size() == 1000);
  CHECK(copy.back().t_ms == 999);
  CHECK(log.size() == 1300);
  CHECK(log.records()[1299].t_ms == 1299);
}

TEST_CASE("csv sink failure disables the sink") {
  TraceCsvSink sink("/dev/full");
  CHECK_FALSE(sink.write({1, "r", 0, 0, 0, 0}));
  CHECK_FALSE(sink.healthy());

  npptwin::testing::TempDir dir;
  TraceCsvSink ok_sink(dir.path() / "t.csv");
  CHECK(ok_sink.write({1, "r", 0, 0, 0, 0}));
  CHECK(ok_sink.truncate());
  std::ifstream in(dir.path() / "t.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == "t_ms,robot_id,x_m,y_m,z_m,yaw_deg\n");
}

TEST_CASE("swarm spawning") {
  auto m = std::make_shared<const WorldMap>(load_default_map());
  World w(m);
  const auto ids = w.spawn_swarm(20, "turbine_hall", 0);
  REQUIRE(ids.size() == 20);
  CHECK(ids.front() == "swarm_00");
  CHECK(ids.back() == "swarm_19");
  const CellRect hall = m->zone("turbine_hall")->rect;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const Pose& p = w.robot(ids[i]).pose;
    const auto cell = m->cell_at(p.x_m, p.y_m);
    REQUIRE(cell);
    CHECK(hall.contains(cell->first, cell->second));
    CHECK(m->cell(cell->first, cell->second).terrain == Terrain::flat);
    for (std::size_t j = 0; j < i; ++j) {
      const Pose& q = w.robot(ids[j]).pose;
      CHECK(std::hypot(p.x_m - q.x_m, p.y_m - q.y_m) >= 1.0);
    }
  }
  // Compact: the bounding box is the smallest near-square block.
  double min_x = 1e9, max_x = -1e9, min_y = 1e9, max_y = -1e9;
  for (const auto& id : ids) {
    min_x = std::min(min_x, w.robot(id).pose.x_m);
    max_x = std::max(max_x, w.robot(id).pose.x_m);
    min_y = std::min(min_y, w.robot(id).pose.y_m);
    max_y = std::max(max_y, w.robot(id).pose.y_m);
  }
  CHECK(max_x - min_x == 4.0);
  CHECK(max_y - min_y == 3.0);

  World a(m), b(m);
  a.spawn_swarm(20, "turbine_hall", 99);
  b.spawn_swarm(20, "turbine_hall", 99);
  for (const auto& [id, r] : a.robots()) CHECK(b.robot(id).pose == r.pose);

  World one(m);
  const auto single = one.spawn_swarm(1, "turbine_hall", 0);
  REQUIRE(single.size() == 1);

  World full(m);
  try {
    full.spawn_swarm(5000, "turbine_hall", 0);
    FAIL("expected capacity error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("holds at most") != std::string::npos);
  }
}

TEST_CASE("swarm origin for a single robot is the rectangle origin") {
  auto m = make_map({"WWWW", "WFFW", "WFFW", "WWWW"}, {{"zones", {{{"name", "z"}, {"rect", {0, 0, 4, 4}}}}}});
  World w(m);
  const auto ids = w.spawn_swarm(1, "z", 0);
  CHECK(w.robot(ids[0]).pose.x_m == 1.5);
  CHECK(w.robot(ids[0]).pose.y_m == 1.5);
  CHECK_THROWS_AS(w.spawn_swarm(5, "z", 0), Error);
}

TEST_CASE("possession discipline") {
  auto m = make_map({"FFFFF"}, {{"spawns",
                                 {{{"name", "r1"}, {"x", 0.5}, {"y", 0.5}}, {{"name", "r2"}, {"x", 3.5}, {"y", 0.5}}}}});
  World w(m);
  const SessionId a = 1, b = 2;
  CHECK_THROWS_AS(w.move(a, "r1", Action::forward), Error);
  w.possess(a, "r1");
  w.possess(a, "r2");
  CHECK_FALSE(w.robot("r1").possessed_by);
  CHECK(w.possessed_robot(a) == "r2");
  try {
    w.possess(b, "r2");
    FAIL("expected conflict");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::conflict);
  }
  w.possess(b, "r1");
  w.move(a, "r2", Action::turn_left);
  w.move(b, "r1", Action::forward);
  CHECK(w.robot("r1").pose.x_m == 1.5);
  CHECK(w.robot("r2").pose.yaw_deg == 15.0);
  try {
    w.move(b, "r2", Action::forward);
    FAIL("expected forbidden");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::forbidden);
  }
  try {
    w.possess(a, "ghost");
    FAIL("expected not found");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::not_found);
  }
  w.release(a);
  CHECK_FALSE(w.robot("r2").possessed_by);
}

TEST_CASE("pose legality and trace continuity under random commands") {
  auto m = std::make_shared<const WorldMap>(load_default_map());
  World w(m);
  std::mt19937_64 rng(2024);
  for (const auto& [id, r] : w.robots()) w.set_trace(id, true);
  const std::vector<std::string> ids = [&] {
    std::vector<std::string> v;
    for (const auto& [id, r] : w.robots()) v.push_back(id);
    return v;
  }();
  for (int t = 1; t <= 3000; ++t) {
    for (const auto& id : ids) {
      const auto kind = w.robot(id).kind;
      const int n = kind == RobotKind::aerial ? 6 : 4;
      w.apply(id, static_cast<Action>(rng() % n));
    }
    w.record_traces(t * 50);
  }
  for (const auto& id : ids) {
    const auto& r = w.robot(id);
    CHECK(pose_legal(*m, r.kind, r.pose));
    const auto recs = w.trace(id).records();
    for (std::size_t i = 1; i < recs.size(); ++i) {
      REQUIRE(recs[i].t_ms > recs[i - 1].t_ms);
      REQUIRE(std::hypot(recs[i].x_m - recs[i - 1].x_m, recs[i].y_m - recs[i - 1].y_m) <= 1.0 + 1e-12);
      REQUIRE(std::abs(recs[i].z_m - recs[i - 1].z_m) <= 0.5);
      const auto cell = m->cell_at(recs[i].x_m, recs[i].y_m);
      REQUIRE(cell);
      REQUIRE(m->cell(cell->first, cell->second).terrain != Terrain::wall);
    }
  }
}

TEST_CASE("same seed and script give identical trace bytes") {
  auto run = [] {
    auto m = std::make_shared<const WorldMap>(load_default_map());
    World w(m);
    w.spawn_swarm(6, "turbine_hall", 17);
    std::mt19937_64 rng(5);
    for (const auto& [id, r] : w.robots()) w.set_trace(id, true);
    for (int t = 1; t <= 400; ++t) {
      for (const auto& [id, r] : w.robots()) {
        if (r.kind != RobotKind::aerial) w.apply(id, static_cast<Action>(rng() % 4));
      }
      w.record_traces(t * 50);
    }
    std::string all;
    for (const auto& [id, r] : w.robots()) all += w.trace(id).to_csv();
    return all;
  };
  CHECK(run() == run());
}

TEST_CASE("spawns must sit on terrain their kind can enter") {
  const auto doc = map_document({"FU"}, {{"spawns", {{{"name", "w"}, {"kind", "wheeled"}, {"x", 1.5}, {"y", 0.5}}}}});
  auto issues = issues_of(doc);
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].col == 1);
  const auto ok = map_document({"FU"}, {{"spawns", {{{"name", "q"}, {"kind", "quadruped"}, {"x", 1.5}, {"y", 0.5}}}}});
  CHECK(issues_of(ok).empty());
}
