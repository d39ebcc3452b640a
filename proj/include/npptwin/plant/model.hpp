#pragma once

#include <array>
#include <cstdint>

namespace npptwin::plant {

// Lumped-parameter PWR surrogate. All constants are strictly positive; the
// defaults put the nominal fixed point at 3000 MW_th / 1000 MW_e.
struct PlantParams {
  double p_max = 3000.0;        // MW_th
  double tau_p = 10.0;          // s
  double u_heat = 100000.0;     // kW/°C
  double h_fg = 1500.0;         // kJ/kg
  double k_t = 289.855;         // kg/s per MPa
  double dh_t = 500.0;          // kJ/kg
  double c_pri = 1.35e6;        // kJ/°C
  double mdot_p_nom = 17000.0;  // kg/s
  double c_p_pri = 5.4;         // kJ/kg·°C
  double w_f_max = 1250.0;      // kg/s per SG
  double rho_sg = 740.0;        // kg/m³
  double a_sg = 20.0;           // m²
  double k_pv = 5e-5;           // MPa·s/kg
  double mdot_cw = 80000.0;     // kg/s
  double c_p_w = 4.18;          // kJ/kg·°C
  double k_pzr = 0.08;          // MPa/°C
  double t_avg_nom = 317.3;     // °C

  // Throws Error(config) naming the first non-positive parameter.
  void validate() const;
};

// Circulating-water outlet relaxation time constant.
inline constexpr double kCoolingWaterTau_s = 20.0;

struct PlantInputs {
  double rod_position = 1.0;
  double turbine_throttle = 1.0;
  std::array<double, 2> sg_feed_valve{0.8, 0.8};
  std::array<double, 2> rcp_speed{1.0, 1.0};
  double cw_in_c = 20.0;

  bool operator==(const PlantInputs&) const = default;
};

struct PlantState {
  double p_mw = 0.0;
  double t_avg_c = 288.0;
  double p_sg_mpa = 7.0;
  std::array<double, 2> l_sg_m{12.0, 12.0};
  double cw_out_c = 20.0;
  std::int64_t sim_time_ms = 0;
  PlantInputs inputs;

  bool operator==(const PlantState&) const = default;
};

// Time derivative of the stored continuous fields. Inputs and clock are not
// integrated.
struct PlantRates {
  double p_mw = 0.0;
  double t_avg_c = 0.0;
  double p_sg_mpa = 0.0;
  std::array<double, 2> l_sg_m{0.0, 0.0};
  double cw_out_c = 0.0;
};

// Quantities that are pure functions of state and inputs.
struct DerivedOutputs {
  double q_sg_kw = 0.0;
  double steam_flow_kgps = 0.0;
  std::array<double, 2> feed_flow_kgps{0.0, 0.0};
  double gen_power_mwe = 0.0;
  double t_hot_c = 0.0;
  double t_cold_c = 0.0;
  double pzr_pressure_mpa = 0.0;
};

// Saturation temperature (°C) from the quarter-power law anchored at one
// atmosphere. Throws Error(domain) for p_mpa <= 0.
double t_sat(double p_mpa);

PlantRates derivatives(const PlantState& state, const PlantParams& params);
DerivedOutputs derived_outputs(const PlantState& state, const PlantParams& params);

// Classical RK4 over dt_ms (1..1000), clamp to registry ranges, advance the
// clock. Throws Error(config) for dt out of range.
PlantState step_plant(const PlantState& state, std::int64_t dt_ms, const PlantParams& params = {});

// Closed-form fixed point for the given inputs. Levels are pure integrators
// and have no fixed point of their own, so they are copied from
// `level_reference`. Throws Error(domain) when throttle or pump speed is zero.
PlantState solve_steady_state(const PlantInputs& inputs, const PlantParams& params = {},
                              std::array<double, 2> level_reference = {12.0, 12.0});

// Hot-standby state used as the cold-start initial condition.
PlantState cold_start_state(const PlantInputs& inputs = {});

}  // namespace npptwin::plant
