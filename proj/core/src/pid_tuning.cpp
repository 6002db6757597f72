#include "altstand/pid_tuning.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "altstand/errors.hpp"

namespace altstand::harness {

RelayTuneResult relay_autotune(const SimConfig& cfg, std::size_t loop,
                               const RelayTuneOptions& opts) {
  if (loop > 2) throw ConfigError("relay loop index must be 0, 1 or 2");
  if (!(opts.relay_amplitude > 0.0 && opts.duration > 0.0 && opts.detune > 0.0)) {
    throw ConfigError("relay amplitude, duration and detune must be > 0");
  }
  const auto& sc = cfg.scenario;
  const double dt = sc.dt;
  plant::BoundaryConditions bc = cfg.boundary;
  bc.mdot_out = opts.mdot_out;
  const double r1 = sc.p1_set(0.0);
  const double r2 = sc.p2_set(0.0);
  const plant::ChamberState c1{r1 * 1000.0, bc.T_in};
  const plant::ChamberState c2{r2 * 1000.0, bc.T_in};
  const auto trim = plant::solve_trim(c1, c2, bc, cfg.plant);
  auto state = plant::make_plant_state(c1, c2, trim.openings, cfg.plant, dt);

  const double direction = loop == 0 ? -1.0 : 1.0;
  const double setpoint = loop == 0 ? r1 : r2;
  const auto steps = static_cast<std::size_t>(std::llround(opts.duration / dt));

  std::vector<double> t_cross;  // upward zero crossings of the signed error
  std::vector<double> err;
  err.reserve(steps);
  double prev_e = 0.0;
  bool high = true;
  const bool noisy = opts.hysteresis > 0.0;
  scenario::Rng rng(sc.noise.seed);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double y = (loop == 0 ? state.c1.P : state.c2.P) / 1000.0;
    const double e = direction * (setpoint - y);
    const double e_meas =
        noisy ? direction * (setpoint - scenario::apply_noise(y, sc.noise.press_bound, rng,
                                                               sc.noise.model))
              : e;
    if (e_meas > opts.hysteresis) high = true;
    if (e_meas < -opts.hysteresis) high = false;
    if (k > 0 && prev_e < 0.0 && e >= 0.0) t_cross.push_back(t);
    prev_e = e;
    err.push_back(e);
    auto cmd = trim.openings;
    cmd[loop] = std::clamp(trim.openings[loop] + (high ? 1.0 : -1.0) * opts.relay_amplitude, 0.0, 1.0);
    state = plant::plant_step(state, cmd, bc, cfg.plant, dt);
  }

  RelayTuneResult res;
  const std::size_t need = opts.periods_averaged + 2;
  if (t_cross.size() < need) return res;
  const double t_last = t_cross.back();
  const double t_first = t_cross[t_cross.size() - 1 - opts.periods_averaged];
  res.tu = (t_last - t_first) / static_cast<double>(opts.periods_averaged);
  const auto k0 = static_cast<std::size_t>(std::llround(t_first / dt));
  const auto k1 = static_cast<std::size_t>(std::llround(t_last / dt));
  const auto [lo, hi] = std::minmax_element(err.begin() + static_cast<std::ptrdiff_t>(k0),
                                            err.begin() + static_cast<std::ptrdiff_t>(k1));
  res.amplitude = 0.5 * (*hi - *lo);
  if (!(res.amplitude > 0.0 && res.tu > 0.0)) return res;
  res.ku = 4.0 * opts.relay_amplitude / (std::numbers::pi * res.amplitude);
  res.gains.kp = opts.detune * 0.6 * res.ku;
  res.gains.ki = opts.detune * 1.2 * res.ku / res.tu;
  res.gains.kd = opts.detune * 0.075 * res.ku * res.tu;
  res.gains.direction = direction;
  res.gains.integral_limit = cfg.pid.loops[loop].integral_limit;
  res.gains.derivative_filter = cfg.pid.loops[loop].derivative_filter;
  res.ok = true;
  return res;
}

std::array<RelayTuneResult, 3> relay_autotune_all(const SimConfig& cfg,
                                                  const RelayTuneOptions& opts) {
  return {relay_autotune(cfg, 0, opts), relay_autotune(cfg, 1, opts), relay_autotune(cfg, 2, opts)};
}

}  // namespace altstand::harness
