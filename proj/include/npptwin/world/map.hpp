#pragma once

#include "npptwin/error.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace npptwin::world {

enum class Terrain : std::uint8_t { flat, uneven, stairs, wall, water };

char terrain_code(Terrain t);
std::optional<Terrain> terrain_from_code(char c);

using Rgb = std::array<std::uint8_t, 3>;

// Cell rectangle [x, x+w) × [y, y+h) in grid coordinates.
struct CellRect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool contains(int col, int row) const { return col >= x && col < x + w && row >= y && row < y + h; }
};

struct Zone {
  std::string name;
  CellRect rect;
};

enum class RobotKind : std::uint8_t { wheeled, bipedal, quadruped, aerial };

std::string_view to_string(RobotKind kind);
std::optional<RobotKind> parse_robot_kind(std::string_view text);

struct Pose {
  double x_m = 0.0;
  double y_m = 0.0;
  double z_m = 0.0;
  double yaw_deg = 0.0;

  bool operator==(const Pose&) const = default;
};

struct SpawnPoint {
  std::string name;
  RobotKind kind = RobotKind::wheeled;
  Pose pose;
};

struct Target {
  double x_m = 0.0;
  double y_m = 0.0;
  double radius_m = 0.5;
};

struct ThermalBinding {
  CellRect rect;
  std::string variable;
};

struct Interaction {
  std::string name;
  int col = 0;
  int row = 0;
  std::string variable;
};

struct Cell {
  Terrain terrain = Terrain::flat;
  std::uint8_t material = 0;
  std::optional<double> base_temp_c;
  int binding = -1;  // index into WorldMap::thermal_bindings
};

struct WorldMap {
  std::string name;
  int width = 0;
  int height = 0;
  double cell_size_m = 1.0;
  std::vector<Cell> cells;  // row-major
  std::vector<Rgb> materials;
  std::vector<Zone> zones;
  std::vector<SpawnPoint> spawns;
  Target target;
  std::vector<ThermalBinding> thermal_bindings;
  std::vector<Interaction> interactions;

  bool in_bounds(int col, int row) const { return col >= 0 && row >= 0 && col < width && row < height; }
  const Cell& cell(int col, int row) const { return cells[static_cast<std::size_t>(row) * width + col]; }
  // Cell under a metric position; nullopt outside the grid.
  std::optional<std::pair<int, int>> cell_at(double x_m, double y_m) const;
  const Zone* zone(std::string_view name) const;
};

struct MapIssue {
  std::string message;
  int row = -1;
  int col = -1;
};

class MapValidationError : public Error {
public:
  explicit MapValidationError(std::vector<MapIssue> issues);
  const std::vector<MapIssue>& issues() const { return issues_; }

private:
  std::vector<MapIssue> issues_;
};

// Validate and build a map. Every thermal binding must name a member of
// `known_variables`; pass nullptr to skip that check.
WorldMap load_map(const nlohmann::json& document, const std::set<std::string>* known_variables);
// Same, checking bindings against the plant registry.
WorldMap load_map(const nlohmann::json& document);
WorldMap load_map_file(const std::filesystem::path& path);

// Serialize back to the document format.
nlohmann::json to_document(const WorldMap& map);

// Path of the bundled npp_default map.
std::filesystem::path default_map_path();
WorldMap load_default_map();

}  // namespace npptwin::world
