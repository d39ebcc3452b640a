#include "npptwin/plant/registry.hpp"

#include "npptwin/error.hpp"

#include <algorithm>
#include <fmt/format.h>

namespace npptwin::plant {

namespace {

using Getter = double (*)(const PlantState&, const DerivedOutputs&, int probe);
using Setter = double& (*)(PlantInputs&);
using StoredRef = double& (*)(PlantState&);

struct Entry {
  VariableDescriptor desc;
  Getter get = nullptr;
  Setter set = nullptr;       // inputs only
  StoredRef stored = nullptr; // integrated fields only
  int probe = -1;
  bool clamp_on_read = false;
};

constexpr double kMaxClockMs = 1e15;

std::vector<Entry> build_table() {
  std::vector<Entry> t;
  auto ro = [&](std::string name, std::string unit, double lo, double hi, Getter g, StoredRef stored = nullptr) {
    t.push_back(Entry{{std::move(name), std::move(unit), Access::read_only, lo, hi}, g, nullptr, stored, -1, stored == nullptr});
  };
  auto rw = [&](std::string name, std::string unit, double lo, double hi, Getter g, Setter s) {
    t.push_back(Entry{{std::move(name), std::move(unit), Access::read_write, lo, hi}, g, s, nullptr, -1, false});
  };

  ro("core_power_mw", "MW", 0.0, 3600.0,
     [](const PlantState& s, const DerivedOutputs&, int) { return s.p_mw; },
     [](PlantState& s) -> double& { return s.p_mw; });
  ro("t_avg_c", "degC", 0.0, 400.0,
     [](const PlantState& s, const DerivedOutputs&, int) { return s.t_avg_c; },
     [](PlantState& s) -> double& { return s.t_avg_c; });
  ro("sg_pressure_mpa", "MPa", 0.1, 12.0,
     [](const PlantState& s, const DerivedOutputs&, int) { return s.p_sg_mpa; },
     [](PlantState& s) -> double& { return s.p_sg_mpa; });
  ro("sg1_level_m", "m", 0.0, 25.0,
     [](const PlantState& s, const DerivedOutputs&, int) { return s.l_sg_m[0]; },
     [](PlantState& s) -> double& { return s.l_sg_m[0]; });
  ro("sg2_level_m", "m", 0.0, 25.0,
     [](const PlantState& s, const DerivedOutputs&, int) { return s.l_sg_m[1]; },
     [](PlantState& s) -> double& { return s.l_sg_m[1]; });
  ro("cond_cw_out_c", "degC", 0.0, 100.0,
     [](const PlantState& s, const DerivedOutputs&, int) { return s.cw_out_c; },
     [](PlantState& s) -> double& { return s.cw_out_c; });
  ro("sim_time_ms", "ms", 0.0, kMaxClockMs,
     [](const PlantState& s, const DerivedOutputs&, int) { return static_cast<double>(s.sim_time_ms); });
  t.back().clamp_on_read = false;

  rw("rod_position", "fraction", 0.0, 1.0,
     [](const PlantState& s, const DerivedOutputs&, int) { return s.inputs.rod_position; },
     [](PlantInputs& in) -> double& { return in.rod_position; });
  rw("turbine_throttle", "fraction", 0.0, 1.0,
     [](const PlantState& s, const DerivedOutputs&, int) { return s.inputs.turbine_throttle; },
     [](PlantInputs& in) -> double& { return in.turbine_throttle; });
  rw("sg1_feed_valve", "fraction", 0.0, 1.0,
     [](const PlantState& s, const DerivedOutputs&, int) { return s.inputs.sg_feed_valve[0]; },
     [](PlantInputs& in) -> double& { return in.sg_feed_valve[0]; });
  rw("sg2_feed_valve", "fraction", 0.0, 1.0,
     [](const PlantState& s, const DerivedOutputs&, int) { return s.inputs.sg_feed_valve[1]; },
     [](PlantInputs& in) -> double& { return in.sg_feed_valve[1]; });
  rw("rcp1_speed", "fraction", 0.0, 1.0,
     [](const PlantState& s, const DerivedOutputs&, int) { return s.inputs.rcp_speed[0]; },
     [](PlantInputs& in) -> double& { return in.rcp_speed[0]; });
  rw("rcp2_speed", "fraction", 0.0, 1.0,
     [](const PlantState& s, const DerivedOutputs&, int) { return s.inputs.rcp_speed[1]; },
     [](PlantInputs& in) -> double& { return in.rcp_speed[1]; });
  rw("cw_in_c", "degC", 0.0, 40.0,
     [](const PlantState& s, const DerivedOutputs&, int) { return s.inputs.cw_in_c; },
     [](PlantInputs& in) -> double& { return in.cw_in_c; });

  ro("t_hot_c", "degC", 0.0, 450.0, [](const PlantState&, const DerivedOutputs& d, int) { return d.t_hot_c; });
  ro("t_cold_c", "degC", 0.0, 450.0, [](const PlantState&, const DerivedOutputs& d, int) { return d.t_cold_c; });
  ro("pzr_pressure_mpa", "MPa", 0.0, 25.0,
     [](const PlantState&, const DerivedOutputs& d, int) { return d.pzr_pressure_mpa; });
  ro("steam_flow_kgps", "kg/s", 0.0, 5000.0,
     [](const PlantState&, const DerivedOutputs& d, int) { return d.steam_flow_kgps; });
  ro("sg1_feed_flow_kgps", "kg/s", 0.0, 1250.0,
     [](const PlantState&, const DerivedOutputs& d, int) { return d.feed_flow_kgps[0]; });
  ro("sg2_feed_flow_kgps", "kg/s", 0.0, 1250.0,
     [](const PlantState&, const DerivedOutputs& d, int) { return d.feed_flow_kgps[1]; });
  ro("gen_power_mwe", "MW", 0.0, 2500.0,
     [](const PlantState&, const DerivedOutputs& d, int) { return d.gen_power_mwe; });
  ro("sg_heat_mw", "MW", 0.0, 10000.0,
     [](const PlantState&, const DerivedOutputs& d, int) { return d.q_sg_kw / 1000.0; });

  // Condenser tube probes: a linear profile from inlet to outlet temperature.
  for (int k = 0; k < kProbeCount; ++k) {
    Entry e;
    e.desc = {fmt::format("probe_{:02d}_c", k), "degC", Access::read_only, 0.0, 100.0};
    e.get = [](const PlantState& s, const DerivedOutputs&, int probe) {
      const double frac = static_cast<double>(probe + 1) / kProbeCount;
      return s.inputs.cw_in_c + (s.cw_out_c - s.inputs.cw_in_c) * frac;
    };
    e.probe = k;
    e.clamp_on_read = true;
    t.push_back(std::move(e));
  }

  std::sort(t.begin(), t.end(), [](const Entry& a, const Entry& b) { return a.desc.name < b.desc.name; });
  return t;
}

const std::vector<Entry>& table() {
  static const std::vector<Entry> t = build_table();
  return t;
}

}  // namespace

const std::vector<VariableDescriptor>& registry() {
  static const std::vector<VariableDescriptor> r = [] {
    std::vector<VariableDescriptor> out;
    for (const Entry& e : table()) out.push_back(e.desc);
    return out;
  }();
  return r;
}

std::optional<std::size_t> find_variable(std::string_view name) {
  const auto& t = table();
  auto it = std::lower_bound(t.begin(), t.end(), name,
                             [](const Entry& e, std::string_view n) { return e.desc.name < n; });
  if (it == t.end() || it->desc.name != name) return std::nullopt;
  return static_cast<std::size_t>(it - t.begin());
}

double evaluate(std::size_t index, const PlantState& state, const DerivedOutputs& derived) {
  const Entry& e = table().at(index);
  const double v = e.get(state, derived, e.probe);
  return e.clamp_on_read ? std::clamp(v, e.desc.min, e.desc.max) : v;
}

std::vector<double> evaluate_all(const PlantState& state, const PlantParams& params) {
  const DerivedOutputs d = derived_outputs(state, params);
  std::vector<double> out;
  out.reserve(table().size());
  for (std::size_t i = 0; i < table().size(); ++i) out.push_back(evaluate(i, state, d));
  return out;
}

double apply_input(std::size_t index, PlantInputs& inputs, double value) {
  const Entry& e = table().at(index);
  if (e.set == nullptr) {
    throw Error(ErrorCode::forbidden, e.desc.name);
  }
  const double applied = std::clamp(value, e.desc.min, e.desc.max);
  e.set(inputs) = applied;
  return applied;
}

void clamp_to_ranges(PlantState& state) {
  for (const Entry& e : table()) {
    if (e.stored != nullptr) {
      double& v = e.stored(state);
      v = std::clamp(v, e.desc.min, e.desc.max);
    } else if (e.set != nullptr) {
      double& v = e.set(state.inputs);
      v = std::clamp(v, e.desc.min, e.desc.max);
    }
  }
}

}  // namespace npptwin::plant
