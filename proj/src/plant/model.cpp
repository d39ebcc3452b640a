#include "npptwin/plant/model.hpp"

#include "npptwin/error.hpp"
#include "npptwin/plant/registry.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace npptwin::plant {

namespace {

constexpr double kAtmosphere_MPa = 0.101325;

double mean_pump_speed(const PlantInputs& in) { return 0.5 * (in.rcp_speed[0] + in.rcp_speed[1]); }

double sg_heat_kw(const PlantState& s, const PlantParams& p) {
  return p.u_heat * mean_pump_speed(s.inputs) * std::max(0.0, s.t_avg_c - t_sat(s.p_sg_mpa));
}

double steam_flow(const PlantState& s, const PlantParams& p) {
  return p.k_t * s.inputs.turbine_throttle * s.p_sg_mpa;
}

// s + h·k for the continuous fields only.
PlantState offset(const PlantState& s, const PlantRates& k, double h) {
  PlantState out = s;
  out.p_mw += h * k.p_mw;
  out.t_avg_c += h * k.t_avg_c;
  out.p_sg_mpa += h * k.p_sg_mpa;
  out.l_sg_m[0] += h * k.l_sg_m[0];
  out.l_sg_m[1] += h * k.l_sg_m[1];
  out.cw_out_c += h * k.cw_out_c;
  return out;
}

}  // namespace

void PlantParams::validate() const {
  const std::pair<const char*, double> fields[] = {
      {"p_max", p_max},     {"tau_p", tau_p},   {"u_heat", u_heat},         {"h_fg", h_fg},
      {"k_t", k_t},         {"dh_t", dh_t},     {"c_pri", c_pri},           {"mdot_p_nom", mdot_p_nom},
      {"c_p_pri", c_p_pri}, {"w_f_max", w_f_max}, {"rho_sg", rho_sg},       {"a_sg", a_sg},
      {"k_pv", k_pv},       {"mdot_cw", mdot_cw}, {"c_p_w", c_p_w},         {"k_pzr", k_pzr},
      {"t_avg_nom", t_avg_nom}};
  for (const auto& [name, value] : fields) {
    if (!(value > 0.0)) {
      throw Error(ErrorCode::config, fmt::format("plant parameter {} must be positive, got {}", name, value));
    }
  }
}

double t_sat(double p_mpa) {
  if (!(p_mpa > 0.0)) {
    throw Error(ErrorCode::domain, fmt::format("saturation temperature undefined for pressure {}", p_mpa));
  }
  return 100.0 * std::pow(p_mpa / kAtmosphere_MPa, 0.25);
}

PlantRates derivatives(const PlantState& s, const PlantParams& p) {
  const PlantInputs& in = s.inputs;
  const double q_sg = sg_heat_kw(s, p);
  const double w_s = steam_flow(s, p);

  PlantRates r;
  r.p_mw = (p.p_max * in.rod_position - s.p_mw) / p.tau_p;
  r.t_avg_c = (1000.0 * s.p_mw - q_sg) / p.c_pri;
  r.p_sg_mpa = p.k_pv * (q_sg / p.h_fg - w_s);
  for (int i = 0; i < 2; ++i) {
    r.l_sg_m[i] = (p.w_f_max * in.sg_feed_valve[i] - 0.5 * w_s) / (p.rho_sg * p.a_sg);
  }
  const double cw_target = in.cw_in_c + w_s * (p.h_fg - p.dh_t) / (p.mdot_cw * p.c_p_w);
  r.cw_out_c = (cw_target - s.cw_out_c) / kCoolingWaterTau_s;
  return r;
}

DerivedOutputs derived_outputs(const PlantState& s, const PlantParams& p) {
  DerivedOutputs d;
  d.q_sg_kw = sg_heat_kw(s, p);
  d.steam_flow_kgps = steam_flow(s, p);
  d.feed_flow_kgps = {p.w_f_max * s.inputs.sg_feed_valve[0], p.w_f_max * s.inputs.sg_feed_valve[1]};
  d.gen_power_mwe = d.steam_flow_kgps * p.dh_t / 1000.0;
  const double flow = 2.0 * p.mdot_p_nom * mean_pump_speed(s.inputs) * p.c_p_pri;
  const double half_rise = flow > 0.0 ? d.q_sg_kw / flow : 0.0;
  d.t_hot_c = s.t_avg_c + half_rise;
  d.t_cold_c = s.t_avg_c - half_rise;
  d.pzr_pressure_mpa = 15.5 + p.k_pzr * (s.t_avg_c - p.t_avg_nom);
  return d;
}

PlantState step_plant(const PlantState& s, std::int64_t dt_ms, const PlantParams& p) {
  if (dt_ms < 1 || dt_ms > 1000) {
    throw Error(ErrorCode::config, fmt::format("step dt_ms must be in [1, 1000], got {}", dt_ms));
  }
  const double h = static_cast<double>(dt_ms) / 1000.0;

  const PlantRates k1 = derivatives(s, p);
  const PlantRates k2 = derivatives(offset(s, k1, h / 2.0), p);
  const PlantRates k3 = derivatives(offset(s, k2, h / 2.0), p);
  const PlantRates k4 = derivatives(offset(s, k3, h), p);

  PlantRates sum;
  sum.p_mw = k1.p_mw + 2.0 * k2.p_mw + 2.0 * k3.p_mw + k4.p_mw;
  sum.t_avg_c = k1.t_avg_c + 2.0 * k2.t_avg_c + 2.0 * k3.t_avg_c + k4.t_avg_c;
  sum.p_sg_mpa = k1.p_sg_mpa + 2.0 * k2.p_sg_mpa + 2.0 * k3.p_sg_mpa + k4.p_sg_mpa;
  for (int i = 0; i < 2; ++i) {
    sum.l_sg_m[i] = k1.l_sg_m[i] + 2.0 * k2.l_sg_m[i] + 2.0 * k3.l_sg_m[i] + k4.l_sg_m[i];
  }
  sum.cw_out_c = k1.cw_out_c + 2.0 * k2.cw_out_c + 2.0 * k3.cw_out_c + k4.cw_out_c;

  PlantState next = offset(s, sum, h / 6.0);
  clamp_to_ranges(next);
  next.sim_time_ms = s.sim_time_ms + dt_ms;
  return next;
}

PlantState solve_steady_state(const PlantInputs& in, const PlantParams& p, std::array<double, 2> level_reference) {
  const double pumps = mean_pump_speed(in);
  if (!(in.turbine_throttle > 0.0) || !(pumps > 0.0) || !(in.rod_position > 0.0)) {
    throw Error(ErrorCode::domain, "no steady state: rod, throttle and pump speed must be positive");
  }
  PlantState s;
  s.inputs = in;
  s.p_mw = p.p_max * in.rod_position;
  const double q_kw = 1000.0 * s.p_mw;
  const double w_s = q_kw / p.h_fg;
  s.p_sg_mpa = w_s / (p.k_t * in.turbine_throttle);
  s.t_avg_c = t_sat(s.p_sg_mpa) + q_kw / (p.u_heat * pumps);
  s.l_sg_m = level_reference;
  s.cw_out_c = in.cw_in_c + w_s * (p.h_fg - p.dh_t) / (p.mdot_cw * p.c_p_w);
  return s;
}

PlantState cold_start_state(const PlantInputs& inputs) {
  PlantState s;
  s.inputs = inputs;
  s.cw_out_c = inputs.cw_in_c;
  return s;
}

}  // namespace npptwin::plant
