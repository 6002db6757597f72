#include "altstand/gas_plant.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "altstand/errors.hpp"

namespace altstand::plant {

namespace {

// Isentropic nozzle flow function sqrt(k/(k-1) (r^(2/k) - r^((k+1)/k))).
double nozzle_flow_function(double r) {
  constexpr double k = kHeatCapacityRatio;
  const double v = k / (k - 1.0) * (std::pow(r, 2.0 / k) - std::pow(r, (k + 1.0) / k));
  return std::sqrt(std::max(v, 0.0));
}

bool physical(const ChamberState& s) {
  return std::isfinite(s.P) && std::isfinite(s.T) && s.P > 0.0 && s.T > 0.0;
}

std::string describe(const PlantState& s) {
  std::ostringstream os;
  os << "t=" << s.t << " s, P1=" << s.c1.P << " Pa, T1=" << s.c1.T << " K, P2=" << s.c2.P
     << " Pa, T2=" << s.c2.T << " K";
  return os.str();
}

template <typename F>
double bisect_increasing(F&& f, double lo, double hi) {
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

void GasConstants::validate() const {
  if (!(R > 0.0)) throw ConfigError("gas constant R must be > 0");
  if (!(cp > R)) throw ConfigError("cp must exceed R (cp - R appears in denominators)");
}

void BoundaryConditions::validate() const {
  if (!(P_in > 0.0 && T_in > 0.0 && P_amb > 0.0 && T_amb > 0.0)) {
    throw ConfigError("boundary pressures and temperatures must be > 0");
  }
  if (P_engine < 0.0) throw ConfigError("engine sink pressure must be >= 0");
  if (!(mdot_out >= 0.0)) throw ConfigError("engine extraction flow must be >= 0");
}

void PlantParams::validate() const {
  gas.validate();
  if (!(v1.volume > 0.0 && v2.volume > 0.0)) throw ConfigError("chamber volumes must be > 0");
  for (const auto& v : valves) {
    if (!(v.diameter > 0.0)) throw ConfigError("valve diameter must be > 0");
    if (!(v.tau > 0.0)) throw ConfigError("valve time constant must be > 0");
    if (!(v.delay >= 0.0)) throw ConfigError("valve delay must be >= 0");
  }
  if (!(supply_area >= 0.0)) throw ConfigError("supply orifice area must be >= 0");
}

ValveUnit::ValveUnit(const ValveSpec& spec, double dt, double initial_opening)
    : spec_(spec), dt_(dt), cmd_(initial_opening), pos_(initial_opening) {
  if (!(dt > 0.0)) throw DomainError("valve step dt must be > 0");
  if (!(spec.tau > 0.0) || !(spec.delay >= 0.0)) {
    throw ConfigError("valve requires tau > 0 and delay >= 0");
  }
  if (!(initial_opening >= 0.0 && initial_opening <= 1.0)) {
    throw DomainError("valve opening must lie in [0, 1]");
  }
  const auto steps = static_cast<std::size_t>(std::llround(spec.delay / dt));
  history_.assign(steps, initial_opening);
}

double ValveUnit::delayed_command_after_push(double cmd) const {
  return history_.empty() ? cmd : history_[head_];
}

double ValveUnit::push(double cmd) {
  cmd_ = cmd;
  if (history_.empty()) return cmd;
  const double out = history_[head_];
  history_[head_] = cmd;
  head_ = (head_ + 1) % history_.size();
  return out;
}

double valve_area(double pos, double diameter) {
  if (!(pos >= 0.0 && pos <= 1.0)) throw DomainError("valve opening must lie in [0, 1]");
  if (!(diameter > 0.0)) throw DomainError("valve diameter must be > 0");
  return pos * std::numbers::pi * diameter * diameter / 4.0;
}

double critical_pressure_ratio() {
  constexpr double k = kHeatCapacityRatio;
  return std::pow(2.0 / (k + 1.0), k / (k - 1.0));
}

double flow_coefficient(double p_up, double p_down, double area) {
  if (!(p_up > 0.0)) throw DomainError("upstream pressure must be > 0");
  if (!(p_down >= 0.0)) throw DomainError("downstream pressure must be >= 0");
  if (!(area >= 0.0)) throw DomainError("flow area must be >= 0");
  const double r = p_down / p_up;
  if (r >= 1.0) return 0.0;
  static const double r_crit = critical_pressure_ratio();
  static const double psi_crit = nozzle_flow_function(r_crit);
  if (r <= r_crit) return kChokedFlowCoefficient;
  return kChokedFlowCoefficient * nozzle_flow_function(r) / psi_crit;
}

FlowResult valve_mass_flow(double p_up, double T_up, double p_down, double area,
                           const GasConstants& gas) {
  if (!(area >= 0.0)) throw DomainError("flow area must be >= 0");
  if (!(p_up > 0.0 && T_up > 0.0)) throw DomainError("upstream state must be positive");
  FlowResult r;
  r.h = gas.cp * T_up;
  if (area == 0.0) return r;
  const double phi = flow_coefficient(p_up, p_down, area);
  r.mdot = phi * area * p_up * std::sqrt(2.0 / (gas.R * T_up));
  return r;
}

ValveUnit valve_actuation_step(ValveUnit v, double cmd, double dt) {
  if (!(dt > 0.0)) throw DomainError("actuation step dt must be > 0");
  if (dt > v.spec().tau / 5.0 * (1.0 + 1e-12)) {
    throw ConfigError("actuation step dt must not exceed tau/5");
  }
  if (v.delay_steps() > 0 && std::abs(dt - v.dt()) > 1e-9 * v.dt()) {
    throw ConfigError("actuation step dt differs from the delay-line step");
  }
  const double c = std::clamp(v.push(std::clamp(cmd, 0.0, 1.0)), 0.0, 1.0);
  const double pos = c + (v.pos() - c) * std::exp(-dt / v.spec().tau);
  v.set_pos(std::clamp(pos, 0.0, 1.0));
  return v;
}

ChamberRates chamber_rates(const ChamberState& s1, const ChamberState& s2,
                           const PlantFlows& f, const BoundaryConditions& bc,
                           const GasConstants& gas, const ChamberGeometry& g1,
                           const ChamberGeometry& g2) {
  if (!(gas.cp > gas.R)) throw ConfigError("cp must exceed R");
  if (!physical(s1) || !physical(s2)) throw DomainError("chamber state must have P > 0 and T > 0");

  const double R = gas.R;
  const double cv = gas.cv();

  const double net1 = f.in.mdot - (f.air.mdot + f.v1.mdot + f.v2.mdot);
  const double energy1 = bc.Q1 + f.in.mdot * f.in.total_enthalpy() -
                         f.air.mdot * f.air.total_enthalpy() -
                         f.v1.mdot * f.v1.total_enthalpy() -
                         f.v2.mdot * f.v2.total_enthalpy() - gas.cp * s1.T * net1;

  // Each chamber uses its own heat rate.
  const double net2 = f.v1.mdot + f.v2.mdot - f.out.mdot;
  const double energy2 = bc.Q2 + f.v1.mdot * f.v1.total_enthalpy() +
                         f.v2.mdot * f.v2.total_enthalpy() -
                         f.out.mdot * f.out.total_enthalpy() - gas.cp * s2.T * net2;

  ChamberRates r;
  r.dP1 = R * s1.T / g1.volume * net1 + R / (g1.volume * cv) * energy1;
  r.dT1 = R * s1.T / (s1.P * g1.volume * cv) * energy1;
  r.dP2 = R * s2.T / g2.volume * net2 + R / (g2.volume * cv) * energy2;
  r.dT2 = R * s2.T / (s2.P * g2.volume * cv) * energy2;
  return r;
}

PlantFlows compute_flows(const ChamberState& s1, const ChamberState& s2,
                         const std::array<double, kValveCount>& openings,
                         const BoundaryConditions& bc, const PlantParams& params) {
  const auto& gas = params.gas;
  PlantFlows f;
  f.in = valve_mass_flow(bc.P_in, bc.T_in, s1.P, params.supply_area, gas);
  f.air = valve_mass_flow(s1.P, s1.T, bc.P_amb,
                          valve_area(openings[kAir], params.valves[kAir].diameter), gas);
  f.v1 = valve_mass_flow(s1.P, s1.T, s2.P,
                         valve_area(openings[kValve1], params.valves[kValve1].diameter), gas);
  f.v2 = valve_mass_flow(s1.P, s1.T, s2.P,
                         valve_area(openings[kValve2], params.valves[kValve2].diameter), gas);
  f.out.mdot = bc.mdot_out;
  f.out.h = gas.cp * s2.T;
  return f;
}

PlantFlows compute_flows(const PlantState& state, const BoundaryConditions& bc,
                         const PlantParams& params) {
  const std::array<double, kValveCount> openings{
      state.valves[0].pos(), state.valves[1].pos(), state.valves[2].pos()};
  return compute_flows(state.c1, state.c2, openings, bc, params);
}

PlantState plant_step(const PlantState& state,
                      const std::array<double, kValveCount>& valve_cmds,
                      const BoundaryConditions& bc, const PlantParams& params, double dt) {
  if (!(dt > 0.0)) throw DomainError("plant step dt must be > 0");

  PlantState next = state;
  std::array<double, kValveCount> target{};
  std::array<double, kValveCount> start{};
  std::array<double, kValveCount> tau{};
  for (std::size_t i = 0; i < kValveCount; ++i) {
    auto& v = next.valves[i];
    if (v.delay_steps() > 0 && std::abs(dt - v.dt()) > 1e-9 * v.dt()) {
      throw ConfigError("plant step dt differs from the valve delay-line step");
    }
    target[i] = std::clamp(v.push(std::clamp(valve_cmds[i], 0.0, 1.0)), 0.0, 1.0);
    start[i] = v.pos();
    tau[i] = v.spec().tau;
  }
  auto openings_at = [&](double s) {
    std::array<double, kValveCount> o{};
    for (std::size_t i = 0; i < kValveCount; ++i) {
      o[i] = std::clamp(target[i] + (start[i] - target[i]) * std::exp(-s / tau[i]), 0.0, 1.0);
    }
    return o;
  };

  using Vec = std::array<double, 4>;
  auto rhs = [&](const Vec& y, double s) -> Vec {
    const ChamberState a{y[0], y[1]};
    const ChamberState b{y[2], y[3]};
    if (!physical(a) || !physical(b)) {
      throw IntegrationFault("nonphysical chamber state inside integration step at " +
                                 describe(state),
                             state);
    }
    const auto flows = compute_flows(a, b, openings_at(s), bc, params);
    const auto r = chamber_rates(a, b, flows, bc, params.gas, params.v1, params.v2);
    return {r.dP1, r.dT1, r.dP2, r.dT2};
  };
  auto axpy = [](const Vec& y, double h, const Vec& k) {
    return Vec{y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2], y[3] + h * k[3]};
  };

  const Vec y0{state.c1.P, state.c1.T, state.c2.P, state.c2.T};
  const Vec k1 = rhs(y0, 0.0);
  const Vec k2 = rhs(axpy(y0, dt / 2.0, k1), dt / 2.0);
  const Vec k3 = rhs(axpy(y0, dt / 2.0, k2), dt / 2.0);
  const Vec k4 = rhs(axpy(y0, dt, k3), dt);
  Vec y1{};
  for (std::size_t i = 0; i < 4; ++i) {
    y1[i] = y0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }

  next.c1 = {y1[0], y1[1]};
  next.c2 = {y1[2], y1[3]};
  next.t = state.t + dt;
  const auto end = openings_at(dt);
  for (std::size_t i = 0; i < kValveCount; ++i) next.valves[i].set_pos(end[i]);

  if (!physical(next.c1) || !physical(next.c2)) {
    throw IntegrationFault("chamber state became nonphysical after step from " + describe(state),
                           state);
  }
  return next;
}

PlantState make_plant_state(const ChamberState& c1, const ChamberState& c2,
                            const std::array<double, kValveCount>& openings,
                            const PlantParams& params, double dt) {
  PlantState s;
  s.c1 = c1;
  s.c2 = c2;
  for (std::size_t i = 0; i < kValveCount; ++i) {
    s.valves[i] = ValveUnit(params.valves[i], dt, openings[i]);
  }
  return s;
}

double chamber_mass(const ChamberState& s, const ChamberGeometry& g, const GasConstants& gas) {
  return s.P * g.volume / (gas.R * s.T);
}

LinearizedCoeffs linearized_coeffs(const ChamberState& s1, const ChamberState& s2,
                                   const GasConstants& gas, const ChamberGeometry& g1,
                                   const ChamberGeometry& g2) {
  if (!physical(s1) || !physical(s2)) throw DomainError("chamber state must have P > 0 and T > 0");
  const double cv = gas.cv();
  // All three valves draw from V1, so every stream carries h = cp T1.
  const double h_from_v1 = gas.cp * s1.T;
  const auto leaving_v1 = [&](double h) {
    return gas.R / g1.volume * (s1.T + (h - gas.cp * s1.T) / cv);
  };
  const auto entering_v2 = [&](double h) {
    return gas.R / g2.volume * (s2.T + (h - gas.cp * s2.T) / cv);
  };
  LinearizedCoeffs c;
  c.a1 = leaving_v1(h_from_v1);
  c.a2 = leaving_v1(h_from_v1);
  c.a_air = leaving_v1(h_from_v1);
  c.b1 = entering_v2(h_from_v1);
  c.b2 = entering_v2(h_from_v1);
  return c;
}

double flow_sensitivity_to_opening(double p_up, double T_up, double p_down, double diameter,
                                   const GasConstants& gas) {
  const double full = valve_area(1.0, diameter);
  return valve_mass_flow(p_up, T_up, p_down, full, gas).mdot;
}

TrimResult solve_trim(const ChamberState& s1, const ChamberState& s2,
                      const BoundaryConditions& bc, const PlantParams& params) {
  TrimResult res;
  res.feasible = true;

  auto v2_inflow = [&](double s) {
    const auto f = compute_flows(s1, s2, {0.0, s, s}, bc, params);
    return f.v1.mdot + f.v2.mdot;
  };
  double shared = 0.0;
  if (bc.mdot_out > 0.0) {
    if (v2_inflow(1.0) < bc.mdot_out) {
      shared = 1.0;
      res.feasible = false;
    } else {
      shared = bisect_increasing([&](double s) { return v2_inflow(s) - bc.mdot_out; }, 0.0, 1.0);
    }
  }

  const auto base = compute_flows(s1, s2, {0.0, shared, shared}, bc, params);
  const double air_needed = base.in.mdot - base.v1.mdot - base.v2.mdot;
  auto air_flow = [&](double s) {
    return compute_flows(s1, s2, {s, shared, shared}, bc, params).air.mdot;
  };
  double air = 0.0;
  if (air_needed < 0.0) {
    res.feasible = false;
  } else if (air_flow(1.0) < air_needed) {
    air = 1.0;
    res.feasible = false;
  } else if (air_needed > 0.0) {
    air = bisect_increasing([&](double s) { return air_flow(s) - air_needed; }, 0.0, 1.0);
  }
  res.openings = {air, shared, shared};
  return res;
}

}  // namespace altstand::plant
