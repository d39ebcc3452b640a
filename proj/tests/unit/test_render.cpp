#include "doctest.h"

#include "support/support.hpp"
#include "support/worlds.hpp"

#include "npptwin/error.hpp"
#include "npptwin/render/image.hpp"
#include "npptwin/render/recorder.hpp"
#include "npptwin/render/render.hpp"

#include <cmath>
#include <random>

using namespace npptwin;
using namespace npptwin::render;
using npptwin::testing::make_map;

namespace {

// Independent statement of the colormap.
Rgb oracle_color(double t) {
  double u = (t + 100.0) / 200.0;
  if (u < 0) u = 0;
  if (u > 1) u = 1;
  const int r = static_cast<int>(std::floor(255.0 * u + 0.5));
  return {static_cast<std::uint8_t>(r), 0, static_cast<std::uint8_t>(255 - r)};
}

const mirror::CacheGeneration kNoPlant{};

}  // namespace

TEST_CASE("thermal colormap") {
  CHECK(thermal_color(-100.0) == Rgb{0, 0, 255});
  CHECK(thermal_color(100.0) == Rgb{255, 0, 0});
  CHECK(thermal_color(0.0) == Rgb{128, 0, 127});
  CHECK(thermal_color(std::nullopt) == Rgb{0, 255, 0});
  CHECK(thermal_color(-1e9) == Rgb{0, 0, 255});
  CHECK(thermal_color(1e9) == Rgb{255, 0, 0});
  CHECK(thermal_color(INFINITY) == Rgb{255, 0, 0});
  CHECK(thermal_color(-INFINITY) == Rgb{0, 0, 255});

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-300.0, 300.0);
  int last_r = -1;
  for (double t = -150.0; t <= 150.0; t += 0.25) {
    const Rgb c = thermal_color(t);
    REQUIRE(c == oracle_color(t));
    REQUIRE(c[1] == 0);
    REQUIRE(c[0] >= last_r);
    last_r = c[0];
  }
  for (int i = 0; i < 100000; ++i) {
    const double t = u(rng);
    const Rgb c = thermal_color(t);
    REQUIRE(c == oracle_color(t));
    REQUIRE(c != kNoTemperature);
  }
}

TEST_CASE("ppm encoding") {
  Image white(1, 1, {255, 255, 255});
  const std::string bytes = encode_ppm(white);
  CHECK(bytes == std::string("P6\n1 1\n255\n\xff\xff\xff", 14));
  CHECK(encode_ppm(Image(256, 144)).rfind("P6\n256 144\n255\n", 0) == 0);
  CHECK(encode_ppm(Image(256, 144)).size() == 15 + 3 * 256 * 144);

  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    Image img(1 + static_cast<int>(rng() % 64), 1 + static_cast<int>(rng() % 64));
    for (auto& b : img.pixels()) b = static_cast<std::uint8_t>(rng());
    REQUIRE(decode_ppm(encode_ppm(img)) == img);
  }
  CHECK_THROWS_AS(decode_ppm("P5\n1 1\n255\n\0\0\0"), Error);
  CHECK_THROWS_AS(decode_ppm(std::string("P6\n1 1\n255\n\0\0", 13)), Error);
  CHECK_THROWS_AS(decode_ppm(std::string("P6\n1 1\n65535\n\0\0\0", 16)), Error);
  CHECK_THROWS_AS(Image(0, 5), Error);
}

TEST_CASE("raycast distance along axis-aligned corridors") {
  for (int len : {1, 2, 7, 33}) {
    std::string row = "W" + std::string(static_cast<std::size_t>(len), 'F') + "W";
    auto m = make_map({row});
    // From the left wall face: x = 1.0 exactly.
    auto hit = cast_ray(*m, 1.0, 0.5, 1.0, 0.0);
    CHECK(hit.inside_map);
    CHECK(hit.col == len + 1);
    CHECK(std::abs(hit.distance - len) <= 1e-9 * len);
    hit = cast_ray(*m, len + 1.0 - 1e-12, 0.5, -1.0, 0.0);
    CHECK(hit.col == 0);
    CHECK(std::abs(hit.distance - len) <= 1e-9 * len);
  }
  // Vertical corridor.
  auto m = make_map({"W", "F", "F", "F", "F", "W"});
  auto hit = cast_ray(*m, 0.5, 1.0, 0.0, 1.0);
  CHECK(hit.row == 5);
  CHECK(std::abs(hit.distance - 4.0) <= 4e-9);
  // A ray leaving an open map reports the edge.
  auto open = make_map({"FFF"});
  hit = cast_ray(*open, 0.5, 0.5, 1.0, 0.0);
  CHECK_FALSE(hit.inside_map);
  CHECK(hit.distance == doctest::Approx(2.5));
}

TEST_CASE("first-person geometry") {
  auto m = make_map({"WWW", "WFW", "WWW"}, {{"spawns", {{{"name", "r1"}, {"x", 1.5}, {"y", 1.5}}}}});
  world::World w(m);
  SceneView scene{w, kNoPlant, false};
  for (int width : {1, 2, 15, 64, 256}) {
    const auto cols = first_person_columns(*m, w.robot("r1").pose, width, 144);
    // The wall face is 0.5 m ahead, so the center is full height.
    CHECK(cols[static_cast<std::size_t>(width / 2)].wall_height == 144);
    for (int i = 0; i < width; ++i) {
      REQUIRE(cols[static_cast<std::size_t>(i)].wall_height ==
              cols[static_cast<std::size_t>(width - 1 - i)].wall_height);
    }
  }
  CHECK_THROWS_AS(render_first_person(scene, "r1", RenderMode::lit, 0, 10), Error);
  CHECK_THROWS_AS(render_first_person(scene, "ghost", RenderMode::lit, 10, 10), Error);

  // Wall 1 m ahead in a long room: center column height = h·cs/d.
  auto room = make_map({"WWWWWWW", "WFFFFFW", "WWWWWWW"}, {{"spawns", {{{"name", "r1"}, {"x", 4.0}, {"y", 1.5}}}}});
  const auto cols = first_person_columns(*room, {4.0, 1.5, 0.0, 0.0}, 255, 100);
  CHECK(cols[127].hit.distance == doctest::Approx(2.0));
  CHECK(cols[127].wall_height == 50);
}

TEST_CASE("lit frame uses the gray floor and ceiling") {
  auto m = make_map({"WWWWWWWWW", "WFFFFFFFW", "WWWWWWWWW"}, {{"spawns", {{{"name", "r1"}, {"x", 1.5}, {"y", 1.5}}}}});
  world::World w(m);
  SceneView scene{w, kNoPlant, false};
  const Image img = render_first_person(scene, "r1", RenderMode::lit, 64, 48);
  CHECK(img.at(32, 0) == kCeilingLit);
  CHECK(img.at(32, 47) == kFloorLit);
  const Image thermal = render_first_person(scene, "r1", RenderMode::thermal, 64, 48);
  CHECK(thermal.at(32, 0) == kNoTemperature);
  CHECK(thermal.at(32, 47) == kNoTemperature);
  // No temperature on these walls: green everywhere.
  for (int x = 0; x < 64; ++x) {
    for (int y = 0; y < 48; ++y) REQUIRE(thermal.at(x, y) == kNoTemperature);
  }
}

TEST_CASE("hot bound wall renders pure red") {
  auto m = make_map({"WWWW", "WFFW", "WWWW"},
                    {{"thermal_bindings", {{{"rect", {0, 0, 4, 3}}, {"variable", "t_hot_c"}}}},
                     {"spawns", {{{"name", "r1"}, {"x", 1.5}, {"y", 1.5}}}}});
  world::World w(m);
  mirror::CacheGeneration gen;
  gen.values["t_hot_c"] = 100.0;
  SceneView scene{w, gen, false};
  const Image img = render_first_person(scene, "r1", RenderMode::thermal, 32, 24);
  const auto cols = first_person_columns(*m, w.robot("r1").pose, 32, 24);
  for (int x = 0; x < 32; ++x) {
    const auto& c = cols[static_cast<std::size_t>(x)];
    const int top = (24 - c.wall_height) / 2;
    for (int y = top; y < top + c.wall_height; ++y) REQUIRE(img.at(x, y) == Rgb{255, 0, 0});
  }
}

TEST_CASE("mode changes color only") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    auto m = std::make_shared<const world::WorldMap>(
        world::load_map(npptwin::testing::random_world_document(rng, 12, 9), nullptr));
    world::World w(m);
    SceneView scene{w, kNoPlant, false};
    const Image lit = render_first_person(scene, "r1", RenderMode::lit, 96, 54);
    const Image thermal = render_first_person(scene, "r1", RenderMode::thermal, 96, 54);
    REQUIRE(npptwin::testing::wall_mask(lit, RenderMode::lit) == npptwin::testing::wall_mask(thermal, RenderMode::thermal));
  }
}

TEST_CASE("render determinism") {
  auto m = std::make_shared<const world::WorldMap>(world::load_default_map());
  world::World w(m);
  mirror::CacheGeneration gen;
  gen.values["cond_cw_out_c"] = 26.0;
  SceneView scene{w, gen, false};
  CHECK(encode_ppm(render_first_person(scene, "r1", RenderMode::lit, 256, 144)) ==
        encode_ppm(render_first_person(scene, "r1", RenderMode::lit, 256, 144)));
  CHECK(encode_ppm(render_topdown(scene, RenderMode::thermal)) == encode_ppm(render_topdown(scene, RenderMode::thermal)));
}

TEST_CASE("top-down view") {
  auto m = std::make_shared<const world::WorldMap>(world::load_default_map());
  world::World w(m);
  SceneView scene{w, kNoPlant, false};
  for (int ppc : {1, 4, 6}) {
    const Image img = render_topdown(scene, RenderMode::lit, ppc);
    CHECK(img.width() == m->width * ppc);
    CHECK(img.height() == m->height * ppc);
  }

  // Marker centroid: average of the 3x3 robot-colored block.
  const auto& r1 = w.robot("r1");
  const Image img = render_topdown(scene, RenderMode::lit, 4);
  const auto [px, py] = topdown_pixel(*m, r1.pose.x_m, r1.pose.y_m, 4);
  double sx = 0, sy = 0;
  int n = 0;
  for (int y = py - 1; y <= py + 1; ++y) {
    for (int x = px - 1; x <= px + 1; ++x) {
      if (img.at(x, y) == r1.color) {
        sx += x + 0.5;
        sy += y + 0.5;
        ++n;
      }
    }
  }
  REQUIRE(n >= 8);  // one pixel may carry the heading tick
  CHECK(std::abs(sx / n / 4.0 - r1.pose.x_m) <= 0.5);
  CHECK(std::abs(sy / n / 4.0 - r1.pose.y_m) <= 0.5);
}

TEST_CASE("trace polyline grows while the robot moves") {
  auto m = std::make_shared<const world::WorldMap>(world::load_default_map());
  world::World w(m);
  w.set_trace("r1", true);
  const Rgb color = w.robot("r1").color;
  auto count = [&] {
    SceneView scene{w, kNoPlant, false};
    const Image img = render_topdown(scene, RenderMode::lit, 4);
    int n = 0;
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) n += img.at(x, y) == color;
    }
    return n;
  };
  int last = count();
  std::int64_t t = 0;
  for (int i = 0; i < 12; ++i) {
    w.apply("r1", world::Action::forward);
    w.record_traces(t += 50);
    const int now = count();
    CHECK(now >= last);
    last = now;
  }
  CHECK(last > 9 + 4 * 8);
}

TEST_CASE("recorder writes gapless, chronologically named frames") {
  npptwin::testing::TempDir dir;
  auto m = std::make_shared<const world::WorldMap>(world::load_default_map());
  world::World w(m);
  SceneView scene{w, kNoPlant, false};
  TopdownRecorder rec(dir.path(), 1000, 0);
  for (std::int64_t t = 50; t <= 10000; t += 50) rec.on_tick(scene, t);
  std::vector<std::string> names;
  for (const auto& e : std::filesystem::directory_iterator(dir.path())) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  REQUIRE(names.size() == 10);
  for (int i = 0; i < 10; ++i) {
    CHECK(names[static_cast<std::size_t>(i)] == TopdownRecorder::file_name(static_cast<std::uint64_t>(i), (i + 1) * 1000));
  }
  CHECK(names.front() == "topdown_00000_1000.ppm");

  // A coarse tick clock still yields one frame per elapsed tick, phase kept.
  npptwin::testing::TempDir dir2;
  TopdownRecorder coarse(dir2.path(), 1000, 0);
  CHECK(coarse.on_tick(scene, 2500).size() == 1);
  CHECK(coarse.on_tick(scene, 2900).empty());
  CHECK(coarse.on_tick(scene, 3000).size() == 1);
}

TEST_CASE("recorder stops on write failure") {
  auto m = std::make_shared<const world::WorldMap>(world::load_default_map());
  world::World w(m);
  SceneView scene{w, kNoPlant, false};
  TopdownRecorder rec("/proc/npptwin-not-writable", 1000, 0);
  rec.on_tick(scene, 1000);
  CHECK_FALSE(rec.running());
  REQUIRE(rec.error());
  CHECK(rec.frames_written() == 0);
  CHECK(rec.on_tick(scene, 2000).empty());
}
