#include "npptwin/world/map.hpp"

#include "npptwin/plant/registry.hpp"
#include "npptwin/world/robot.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <nlohmann/json.hpp>

#ifndef NPPTWIN_DEFAULT_MAP
#define NPPTWIN_DEFAULT_MAP "data/maps/npp_default.json"
#endif

namespace npptwin::world {

using nlohmann::json;

namespace {

// Material index each terrain gets when no region overrides it.
constexpr std::uint8_t kDefaultMaterial[] = {0, 1, 2, 3, 4};

const std::vector<Rgb>& default_palette() {
  static const std::vector<Rgb> p = {
      {150, 150, 140},  // flat concrete
      {120, 100, 80},   // uneven gravel
      {170, 140, 90},   // stairs
      {90, 90, 100},    // wall
      {40, 90, 170},    // water
      {200, 60, 40},    // reactor vessel / hot metal
      {220, 200, 60},   // electrical gear
      {110, 160, 110},  // piping
  };
  return p;
}

std::string issue_text(const std::vector<MapIssue>& issues) {
  std::string out = "map validation failed:";
  for (const auto& i : issues) {
    if (i.row >= 0) {
      out += fmt::format(" [row {} col {}] {};", i.row, i.col, i.message);
    } else {
      out += fmt::format(" {};", i.message);
    }
  }
  return out;
}

CellRect read_rect(const json& j) {
  if (!j.is_array() || j.size() != 4) throw std::invalid_argument("rect must be [x, y, w, h]");
  return CellRect{j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

json write_rect(const CellRect& r) { return json::array({r.x, r.y, r.w, r.h}); }

class Validator {
public:
  void add(std::string msg, int row = -1, int col = -1) { issues_.push_back({std::move(msg), row, col}); }
  bool ok() const { return issues_.empty(); }
  [[noreturn]] void fail() { throw MapValidationError(std::move(issues_)); }
  void finish() {
    if (!ok()) fail();
  }

private:
  std::vector<MapIssue> issues_;
};

bool rect_in_bounds(const CellRect& r, int w, int h) {
  return r.w > 0 && r.h > 0 && r.x >= 0 && r.y >= 0 && r.x + r.w <= w && r.y + r.h <= h;
}

}  // namespace

char terrain_code(Terrain t) {
  switch (t) {
    case Terrain::flat: return 'F';
    case Terrain::uneven: return 'U';
    case Terrain::stairs: return 'S';
    case Terrain::wall: return 'W';
    case Terrain::water: return '~';
  }
  return '?';
}

std::optional<Terrain> terrain_from_code(char c) {
  switch (c) {
    case 'F': return Terrain::flat;
    case 'U': return Terrain::uneven;
    case 'S': return Terrain::stairs;
    case 'W': return Terrain::wall;
    case '~': return Terrain::water;
    default: return std::nullopt;
  }
}

std::string_view to_string(RobotKind kind) {
  switch (kind) {
    case RobotKind::wheeled: return "wheeled";
    case RobotKind::bipedal: return "bipedal";
    case RobotKind::quadruped: return "quadruped";
    case RobotKind::aerial: return "aerial";
  }
  return "unknown";
}

std::optional<RobotKind> parse_robot_kind(std::string_view text) {
  if (text == "wheeled") return RobotKind::wheeled;
  if (text == "bipedal") return RobotKind::bipedal;
  if (text == "quadruped") return RobotKind::quadruped;
  if (text == "aerial") return RobotKind::aerial;
  return std::nullopt;
}

std::optional<std::pair<int, int>> WorldMap::cell_at(double x_m, double y_m) const {
  if (!(x_m >= 0.0) || !(y_m >= 0.0)) return std::nullopt;
  const int col = static_cast<int>(std::floor(x_m / cell_size_m));
  const int row = static_cast<int>(std::floor(y_m / cell_size_m));
  if (!in_bounds(col, row)) return std::nullopt;
  return std::pair{col, row};
}

const Zone* WorldMap::zone(std::string_view zone_name) const {
  for (const auto& z : zones) {
    if (z.name == zone_name) return &z;
  }
  return nullptr;
}

MapValidationError::MapValidationError(std::vector<MapIssue> issues)
    : Error(ErrorCode::config, issue_text(issues)), issues_(std::move(issues)) {}

WorldMap load_map(const json& doc, const std::set<std::string>* known_variables) {
  Validator v;
  WorldMap m;
  try {
    if (!doc.is_object()) {
      v.add("document must be an object");
      v.fail();
    }
    m.name = doc.value("name", std::string("unnamed"));
    m.width = doc.at("width").get<int>();
    m.height = doc.at("height").get<int>();
    m.cell_size_m = doc.value("cell_size_m", 1.0);
    if (m.width < 1 || m.height < 1) {
      v.add(fmt::format("dimensions must be positive, got {}x{}", m.width, m.height));
      v.fail();
    }
    if (!(m.cell_size_m > 0.0)) v.add("cell_size_m must be positive");

    m.materials = default_palette();
    if (doc.contains("materials")) {
      m.materials.clear();
      for (const auto& c : doc.at("materials")) m.materials.push_back(c.get<Rgb>());
      if (m.materials.size() < 5) v.add("materials palette needs at least 5 entries");
      if (m.materials.size() > 256) v.add("materials palette holds at most 256 entries");
    }

    const auto& rows = doc.at("rows");
    if (!rows.is_array() || static_cast<int>(rows.size()) != m.height) {
      v.add(fmt::format("expected {} rows, got {}", m.height, rows.is_array() ? rows.size() : 0));
      v.fail();
    }
    m.cells.resize(static_cast<std::size_t>(m.width) * m.height);
    for (int r = 0; r < m.height; ++r) {
      const auto line = rows[r].get<std::string>();
      if (static_cast<int>(line.size()) != m.width) {
        v.add(fmt::format("row length {} does not match width {}", line.size(), m.width), r, -1);
        continue;
      }
      for (int c = 0; c < m.width; ++c) {
        auto t = terrain_from_code(line[c]);
        if (!t) {
          v.add(fmt::format("unknown terrain code '{}'", line[c]), r, c);
          continue;
        }
        Cell& cell = m.cells[static_cast<std::size_t>(r) * m.width + c];
        cell.terrain = *t;
        cell.material = kDefaultMaterial[static_cast<int>(*t)];
      }
    }
    v.finish();

    if (doc.contains("material_regions")) {
      for (const auto& reg : doc.at("material_regions")) {
        const CellRect rect = read_rect(reg.at("rect"));
        const int mat = reg.at("material").get<int>();
        if (!rect_in_bounds(rect, m.width, m.height)) {
          v.add("material region out of bounds", rect.y, rect.x);
          continue;
        }
        if (mat < 0 || mat >= static_cast<int>(m.materials.size())) {
          v.add(fmt::format("material index {} outside palette", mat), rect.y, rect.x);
          continue;
        }
        for (int r = rect.y; r < rect.y + rect.h; ++r) {
          for (int c = rect.x; c < rect.x + rect.w; ++c) {
            m.cells[static_cast<std::size_t>(r) * m.width + c].material = static_cast<std::uint8_t>(mat);
          }
        }
      }
    }

    for (const auto& z : doc.value("zones", json::array())) {
      Zone zone{z.at("name").get<std::string>(), read_rect(z.at("rect"))};
      if (!rect_in_bounds(zone.rect, m.width, m.height)) {
        v.add(fmt::format("zone '{}' outside the grid", zone.name), zone.rect.y, zone.rect.x);
      }
      if (m.zone(zone.name) != nullptr) v.add(fmt::format("duplicate zone '{}'", zone.name));
      m.zones.push_back(std::move(zone));
    }

    for (const auto& s : doc.value("spawns", json::array())) {
      SpawnPoint sp;
      sp.name = s.at("name").get<std::string>();
      const auto kind_text = s.value("kind", std::string("wheeled"));
      auto kind = parse_robot_kind(kind_text);
      if (!kind) {
        v.add(fmt::format("spawn '{}' has unknown kind '{}'", sp.name, kind_text));
        continue;
      }
      sp.kind = *kind;
      sp.pose = {s.at("x").get<double>(), s.at("y").get<double>(), s.value("z", 0.0), s.value("yaw", 0.0)};
      const auto cell = m.cell_at(sp.pose.x_m, sp.pose.y_m);
      if (!cell) {
        v.add(fmt::format("spawn '{}' outside the grid", sp.name));
      } else if (!can_enter(sp.kind, m.cell(cell->first, cell->second).terrain)) {
        v.add(fmt::format("spawn '{}' on terrain a {} robot cannot enter", sp.name, to_string(sp.kind)), cell->second,
              cell->first);
      }
      if (sp.kind != RobotKind::aerial && sp.pose.z_m != 0.0) v.add(fmt::format("ground spawn '{}' with z != 0", sp.name));
      if (sp.pose.z_m < 0.0 || sp.pose.z_m > 10.0) v.add(fmt::format("spawn '{}' altitude outside [0, 10]", sp.name));
      for (const auto& other : m.spawns) {
        if (other.name == sp.name) v.add(fmt::format("duplicate spawn '{}'", sp.name));
      }
      m.spawns.push_back(std::move(sp));
    }

    if (!doc.contains("target")) {
      v.add("exactly one target is required");
    } else {
      const auto& t = doc.at("target");
      if (t.is_array()) {
        v.add("exactly one target is required, got a list");
      } else {
        m.target = {t.at("x").get<double>(), t.at("y").get<double>(), t.value("radius_m", 0.5)};
        if (!m.cell_at(m.target.x_m, m.target.y_m)) v.add("target outside the grid");
        if (!(m.target.radius_m > 0.0)) v.add("target radius must be positive");
      }
    }

    for (const auto& st : doc.value("static_temps", json::array())) {
      const CellRect rect = read_rect(st.at("rect"));
      const double temp = st.at("temp_c").get<double>();
      if (!rect_in_bounds(rect, m.width, m.height)) {
        v.add("static temperature region out of bounds", rect.y, rect.x);
        continue;
      }
      for (int r = rect.y; r < rect.y + rect.h; ++r) {
        for (int c = rect.x; c < rect.x + rect.w; ++c) m.cells[static_cast<std::size_t>(r) * m.width + c].base_temp_c = temp;
      }
    }

    for (const auto& b : doc.value("thermal_bindings", json::array())) {
      ThermalBinding binding{read_rect(b.at("rect")), b.at("variable").get<std::string>()};
      if (!rect_in_bounds(binding.rect, m.width, m.height)) {
        v.add(fmt::format("binding to '{}' out of bounds", binding.variable), binding.rect.y, binding.rect.x);
        continue;
      }
      if (known_variables != nullptr && !known_variables->contains(binding.variable)) {
        v.add(fmt::format("binding names unknown variable '{}'", binding.variable), binding.rect.y, binding.rect.x);
        continue;
      }
      const int index = static_cast<int>(m.thermal_bindings.size());
      for (int r = binding.rect.y; r < binding.rect.y + binding.rect.h; ++r) {
        for (int c = binding.rect.x; c < binding.rect.x + binding.rect.w; ++c) {
          Cell& cell = m.cells[static_cast<std::size_t>(r) * m.width + c];
          if (cell.base_temp_c || cell.binding >= 0) {
            v.add("cell has more than one temperature source", r, c);
          }
          cell.binding = index;
        }
      }
      m.thermal_bindings.push_back(std::move(binding));
    }

    for (const auto& it : doc.value("interactions", json::array())) {
      Interaction in{it.at("name").get<std::string>(), it.at("col").get<int>(), it.at("row").get<int>(),
                     it.value("variable", std::string())};
      if (!m.in_bounds(in.col, in.row)) v.add(fmt::format("interaction '{}' outside the grid", in.name), in.row, in.col);
      if (!in.variable.empty() && known_variables != nullptr && !known_variables->contains(in.variable)) {
        v.add(fmt::format("interaction '{}' names unknown variable '{}'", in.name, in.variable), in.row, in.col);
      }
      m.interactions.push_back(std::move(in));
    }
  } catch (const MapValidationError&) {
    throw;
  } catch (const std::exception& e) {
    v.add(fmt::format("malformed document: {}", e.what()));
  }
  v.finish();
  return m;
}

WorldMap load_map(const json& document) {
  static const std::set<std::string> names = [] {
    std::set<std::string> s;
    for (const auto& v : plant::registry()) s.insert(v.name);
    return s;
  }();
  return load_map(document, &names);
}

WorldMap load_map_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open map " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw MapValidationError({MapIssue{fmt::format("{}: {}", path.string(), e.what())}});
  }
  return load_map(doc);
}

json to_document(const WorldMap& m) {
  json doc;
  doc["name"] = m.name;
  doc["width"] = m.width;
  doc["height"] = m.height;
  doc["cell_size_m"] = m.cell_size_m;
  json rows = json::array();
  for (int r = 0; r < m.height; ++r) {
    std::string line;
    for (int c = 0; c < m.width; ++c) line += terrain_code(m.cell(c, r).terrain);
    rows.push_back(line);
  }
  doc["rows"] = rows;
  doc["materials"] = m.materials;
  json regions = json::array();
  for (int r = 0; r < m.height; ++r) {
    for (int c = 0; c < m.width; ++c) {
      const Cell& cell = m.cell(c, r);
      if (cell.material != kDefaultMaterial[static_cast<int>(cell.terrain)]) {
        regions.push_back({{"rect", write_rect({c, r, 1, 1})}, {"material", cell.material}});
      }
    }
  }
  doc["material_regions"] = regions;
  json zones = json::array();
  for (const auto& z : m.zones) zones.push_back({{"name", z.name}, {"rect", write_rect(z.rect)}});
  doc["zones"] = zones;
  json spawns = json::array();
  for (const auto& s : m.spawns) {
    spawns.push_back({{"name", s.name}, {"kind", to_string(s.kind)}, {"x", s.pose.x_m}, {"y", s.pose.y_m},
                      {"z", s.pose.z_m}, {"yaw", s.pose.yaw_deg}});
  }
  doc["spawns"] = spawns;
  doc["target"] = {{"x", m.target.x_m}, {"y", m.target.y_m}, {"radius_m", m.target.radius_m}};
  json temps = json::array();
  for (int r = 0; r < m.height; ++r) {
    for (int c = 0; c < m.width; ++c) {
      if (m.cell(c, r).base_temp_c) temps.push_back({{"rect", write_rect({c, r, 1, 1})}, {"temp_c", *m.cell(c, r).base_temp_c}});
    }
  }
  doc["static_temps"] = temps;
  json bindings = json::array();
  for (const auto& b : m.thermal_bindings) bindings.push_back({{"rect", write_rect(b.rect)}, {"variable", b.variable}});
  doc["thermal_bindings"] = bindings;
  json inter = json::array();
  for (const auto& i : m.interactions) {
    inter.push_back({{"name", i.name}, {"col", i.col}, {"row", i.row}, {"variable", i.variable}});
  }
  doc["interactions"] = inter;
  return doc;
}

std::filesystem::path default_map_path() {
  if (const char* env = std::getenv("NPPTWIN_DEFAULT_MAP"); env != nullptr && *env != '\0') return env;
  return NPPTWIN_DEFAULT_MAP;
}

WorldMap load_default_map() { return load_map_file(default_map_path()); }

}  // namespace npptwin::world
