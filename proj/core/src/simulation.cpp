#include "altstand/simulation.hpp"

#include <chrono>
#include <cmath>
#include <nlohmann/json.hpp>

#include "altstand/control.hpp"
#include "altstand/errors.hpp"
#include "altstand/observer.hpp"
#include "altstand/penalty.hpp"

namespace altstand::harness {

namespace {

constexpr double kPaPerKpa = 1000.0;

std::array<double, 3> scaled(const std::array<double, 3>& row, double k) {
  return {row[0] * k, row[1] * k, row[2] * k};
}

MetricsOptions metrics_options(const SimConfig& cfg) {
  return {cfg.scenario.eps1, cfg.scenario.eps2, cfg.window.start, cfg.window.end,
          cfg.window.settle_band_kpa};
}

}  // namespace

std::array<double, 2> effective_gains(const SimConfig& cfg) {
  const auto& g = cfg.adrc.gains;
  if (cfg.adrc.b_eff_override) return {g.b_eff1, g.b_eff2};
  const auto& p = cfg.plant;
  const auto& bc = cfg.boundary;
  const plant::ChamberState s1{cfg.adrc.nominal_p1_kpa * kPaPerKpa, bc.T_in};
  const plant::ChamberState s2{cfg.adrc.nominal_p2_kpa * kPaPerKpa, bc.T_in};
  const auto lc = plant::linearized_coeffs(s1, s2, p.gas, p.v1, p.v2);
  const auto& va = p.valves[plant::kAir];
  const auto& v1 = p.valves[plant::kValve1];
  const auto& v2 = p.valves[plant::kValve2];
  const double k_air = plant::flow_sensitivity_to_opening(s1.P, s1.T, bc.P_amb, va.diameter, p.gas);
  const double k1 = plant::flow_sensitivity_to_opening(s1.P, s1.T, s2.P, v1.diameter, p.gas);
  const double k2 = plant::flow_sensitivity_to_opening(s1.P, s1.T, s2.P, v2.diameter, p.gas);
  const double rho = g.rho;
  const double b1 = -lc.a_air * k_air / va.tau / kPaPerKpa;
  const double b2 =
      (lc.b1 * rho * k1 / v1.tau + lc.b2 * (1.0 - rho) * k2 / v2.tau) / kPaPerKpa;
  return {b1, b2};
}

SimResult run_simulation(const SimConfig& cfg) {
  cfg.validate();
  const auto wall0 = std::chrono::steady_clock::now();
  const auto& sc = cfg.scenario;
  const double dt = sc.dt;

  SimResult res;
  const auto b = effective_gains(cfg);
  control::AdrcGains gains = cfg.adrc.gains;
  gains.b_eff1 = b[0];
  gains.b_eff2 = b[1];
  gains.validate();
  res.info.b_eff1 = b[0];
  res.info.b_eff2 = b[1];

  plant::BoundaryConditions bc = cfg.boundary;
  bc.mdot_out = sc.mdot_out(0.0);
  const plant::ChamberState c1{sc.p1_set(0.0) * kPaPerKpa, bc.T_in};
  const plant::ChamberState c2{sc.p2_set(0.0) * kPaPerKpa, bc.T_in};
  const auto trim = plant::solve_trim(c1, c2, bc, cfg.plant);
  res.info.trim = trim.openings;
  res.info.trim_feasible = trim.feasible;
  plant::PlantState state = plant::make_plant_state(c1, c2, trim.openings, cfg.plant, dt);

  const auto eso1 = observer::EsoConfig::from_bandwidth(
      cfg.adrc.omega1, scaled(control::kAllocationRowV1, gains.b_eff1));
  const auto eso2 = observer::EsoConfig::from_bandwidth(
      cfg.adrc.omega2, scaled(control::kAllocationRowV2, gains.b_eff2));
  observer::EsoState z1{c1.P / kPaPerKpa, 0.0, 0.0};
  observer::EsoState z2{c2.P / kPaPerKpa, 0.0, 0.0};
  const double td_h = cfg.adrc.td_step_factor * dt;
  auto td1 = observer::TdState::at_rest(sc.p1_set(0.0), cfg.adrc.td_speed, td_h);
  auto td2 = observer::TdState::at_rest(sc.p2_set(0.0), cfg.adrc.td_speed, td_h);

  auto coord = penalty::CoordinatorState::start(cfg.penalty.gamma);
  penalty::PenaltyProblem online = cfg.penalty;
  online.eps1 = sc.eps1;
  online.eps2 = sc.eps2;

  std::array<control::PidState, 3> pid{};
  scenario::Rng rng(sc.noise.seed);

  control::ValveCommandSet applied = trim.openings;
  const auto steps = static_cast<std::size_t>(std::llround(sc.duration / dt));
  res.series.reserve(steps + 1);

  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double r1 = sc.p1_set(t);
    const double r2 = sc.p2_set(t);
    bc.mdot_out = sc.mdot_out(t);

    const double p1 = state.c1.P / kPaPerKpa;
    const double p2 = state.c2.P / kPaPerKpa;
    const double y1 = scenario::apply_noise(p1, sc.noise.press_bound, rng, sc.noise.model);
    const double y2 = scenario::apply_noise(p2, sc.noise.press_bound, rng, sc.noise.model);

    const std::array<double, 3> offsets{applied[0] - trim.openings[0],
                                        applied[1] - trim.openings[1],
                                        applied[2] - trim.openings[2]};
    z1 = observer::eso_step(z1, y1, offsets, eso1, dt);
    z2 = observer::eso_step(z2, y2, offsets, eso2, dt);
    td1 = observer::td_step(td1, r1, dt);
    td2 = observer::td_step(td2, r2, dt);

    online.center_on(r1, r2);
    const auto co = penalty::coordinator_tick(z1.z1, z2.z1, online, coord, cfg.schedule);
    coord = co.state;

    control::ValveCommandSet raw{};
    if (cfg.controller == ControllerKind::kAdrc) {
      const auto u = control::adrc_command(z1, z2, td1, td2, co.gradient, gains);
      raw = control::allocate_valves(u.U1, u.U2, gains.rho, trim.openings).commands;
    } else {
      const std::array<double, 3> sp{r1, r2, r2};
      const std::array<double, 3> meas{y1, y2, y2};
      for (std::size_t i = 0; i < 3; ++i) {
        const auto o = control::pid_step(pid[i], sp[i], meas[i], cfg.pid.loops[i],
                                         trim.openings[i], dt);
        pid[i] = o.state;
        raw[i] = o.command;
      }
    }
    const auto cmd = control::saturate_and_rate_limit(raw, applied, dt, cfg.rate_max);

    const auto flows = plant::compute_flows(state, bc, cfg.plant);
    TickRecord rec;
    rec.t = t;
    rec.p1_true = p1;
    rec.p2_true = p2;
    rec.p1_meas = y1;
    rec.p2_meas = y2;
    rec.p1_set = r1;
    rec.p2_set = r2;
    rec.t1 = state.c1.T;
    rec.t2 = state.c2.T;
    rec.cmd = cmd;
    for (std::size_t i = 0; i < 3; ++i) rec.act[i] = state.valves[i].pos();
    rec.mdot_in = flows.in.mdot;
    rec.mdot_air = flows.air.mdot;
    rec.mdot_1 = flows.v1.mdot;
    rec.mdot_2 = flows.v2.mdot;
    rec.mdot_out = flows.out.mdot;
    rec.z13 = z1.z3;
    rec.z23 = z2.z3;
    rec.grad_l1 = co.gradient[0];
    rec.grad_l2 = co.gradient[1];
    rec.gamma = coord.gamma;
    rec.L = co.L;
    res.series.push_back(rec);

    if (k == steps) break;
    try {
      state = plant::plant_step(state, cmd, bc, cfg.plant, dt);
    } catch (const plant::IntegrationFault& e) {
      res.fault = FaultRecord{t, e.what()};
      break;
    }
    applied = cmd;
  }

  const auto opts = metrics_options(cfg);
  res.metrics = compute_metrics(res.series, opts);
  res.phases = phase_metrics(res.series, opts);
  res.info.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  return res;
}

namespace {

nlohmann::json metrics_json(const RunMetrics& m) {
  return {{"rmse_v1_kpa", m.rmse_v1},
          {"rmse_v2_kpa", m.rmse_v2},
          {"max_abs_err_v1_kpa", m.max_abs_err_v1},
          {"max_abs_err_v2_kpa", m.max_abs_err_v2},
          {"valve_p2p", {{"air", m.valve_p2p[0]}, {"valve1", m.valve_p2p[1]}, {"valve2", m.valve_p2p[2]}}},
          {"constraint_violation_time_s", m.constraint_violation_time},
          {"settling_time_v2_s", m.settling_time_v2},
          {"samples", m.samples}};
}

}  // namespace

std::string run_metadata_json(const SimConfig& cfg, const SimResult& result) {
  nlohmann::json j;
  j["controller"] = to_string(cfg.controller);
  j["scenario"] = cfg.scenario.name;
  j["dt_s"] = cfg.scenario.dt;
  j["control_cycle_note"] = "single-rate loop; controller cycle time assumed equal to dt";
  j["seed"] = cfg.scenario.noise.seed;
  j["pd_sign_convention"] =
      cfg.adrc.gains.pd_sign == control::PdSign::kAsPrinted ? "as-printed" : "conventional";
  j["trim"] = {{"air", result.info.trim[0]},
               {"valve1", result.info.trim[1]},
               {"valve2", result.info.trim[2]},
               {"feasible", result.info.trim_feasible}};
  j["b_eff_kpa_s2"] = {{"v1", result.info.b_eff1}, {"v2", result.info.b_eff2},
                       {"override", cfg.adrc.b_eff_override}};
  if (result.fault) {
    j["fault"] = {{"t_s", result.fault->t}, {"message", result.fault->message}};
  } else {
    j["fault"] = nullptr;
  }
  j["metrics"] = metrics_json(result.metrics);
  nlohmann::json phases = nlohmann::json::array();
  for (const auto& p : result.phases) {
    auto pj = metrics_json(p.metrics);
    pj["name"] = p.name;
    pj["t0_s"] = p.t0;
    pj["t1_s"] = p.t1;
    phases.push_back(pj);
  }
  j["phases"] = phases;
  return j.dump(2) + "\n";
}

}  // namespace altstand::harness
