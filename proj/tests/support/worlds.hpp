#pragma once

#include "support/support.hpp"

#include "npptwin/render/render.hpp"

#include <random>

namespace npptwin::testing {

// Walled random world. Every wall carries a static temperature so thermal
// walls are never green, and no material collides with the lit floor or
// ceiling grays, so wall pixels are recoverable from either image.
inline nlohmann::json random_world_document(std::mt19937_64& rng, int w, int h) {
  std::uniform_real_distribution<double> temp(-150.0, 150.0);
  std::vector<std::string> rows(static_cast<std::size_t>(h), std::string(static_cast<std::size_t>(w), 'F'));
  nlohmann::json temps = nlohmann::json::array();
  nlohmann::json regions = nlohmann::json::array();
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const bool border = r == 0 || c == 0 || r == h - 1 || c == w - 1;
      if (border || (c != w / 2 || r != h / 2) && rng() % 5 == 0) {
        rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = 'W';
        temps.push_back({{"rect", {c, r, 1, 1}}, {"temp_c", temp(rng)}});
        regions.push_back({{"rect", {c, r, 1, 1}}, {"material", 3 + static_cast<int>(rng() % 5)}});
      }
    }
  }
  nlohmann::json materials = nlohmann::json::array();
  for (int i = 0; i < 8; ++i) {
    materials.push_back({100 + 15 * i, 200 - 10 * i, 40 + 20 * i});
  }
  std::uniform_int_distribution<int> yaw(0, 23);
  return map_document(rows, {{"materials", materials},
                             {"material_regions", regions},
                             {"static_temps", temps},
                             {"spawns",
                              {{{"name", "r1"},
                                {"x", w / 2 + 0.5},
                                {"y", h / 2 + 0.5},
                                {"yaw", 15.0 * yaw(rng) - 165.0}}}},
                             {"target", {{"x", w / 2 + 0.5}, {"y", h / 2 + 0.5}}}});
}

// Per column, the rows whose pixels belong to a wall.
inline std::vector<std::vector<bool>> wall_mask(const render::Image& img, render::RenderMode mode) {
  std::vector<std::vector<bool>> mask(static_cast<std::size_t>(img.width()),
                                      std::vector<bool>(static_cast<std::size_t>(img.height())));
  for (int x = 0; x < img.width(); ++x) {
    for (int y = 0; y < img.height(); ++y) {
      const auto c = img.at(x, y);
      const bool wall = mode == render::RenderMode::lit ? (c != render::kFloorLit && c != render::kCeilingLit)
                                                        : c != render::kNoTemperature;
      mask[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] = wall;
    }
  }
  return mask;
}

}  // namespace npptwin::testing
