#include "altstand/control.hpp"

#include <algorithm>
#include <cmath>

#include "altstand/errors.hpp"

namespace altstand::control {

void AdrcGains::validate() const {
  for (double k : {k11, k12, k13, k21, k22, k23}) {
    if (!(k >= 0.0)) throw ConfigError("ADRC gains must be >= 0");
  }
  if (b_eff1 == 0.0 || b_eff2 == 0.0 || !std::isfinite(b_eff1) || !std::isfinite(b_eff2)) {
    throw ConfigError("effective control gains must be finite and nonzero");
  }
  if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("allocation fraction rho must lie in [0, 1]");
}

AdrcOutput adrc_command(const observer::EsoState& z_v1, const observer::EsoState& z_v2,
                        const observer::TdState& td_v1, const observer::TdState& td_v2,
                        const std::array<double, 2>& grad_l, const AdrcGains& g) {
  const double d = g.pd_sign == PdSign::kAsPrinted ? -1.0 : 1.0;
  AdrcOutput out;
  out.u_c1 = g.k11 * (td_v1.v1 - z_v1.z1) + d * g.k12 * (td_v1.v2 - z_v1.z2) - g.k13 * grad_l[0];
  out.u_c2 = g.k21 * (td_v2.v1 - z_v2.z1) + d * g.k22 * (td_v2.v2 - z_v2.z2) - g.k23 * grad_l[1];
  out.U1 = (out.u_c1 - z_v1.z3) / g.b_eff1;
  out.U2 = (out.u_c2 - z_v2.z3) / g.b_eff2;
  return out;
}

Allocation allocate_valves(double U1, double U2, double rho, const ValveCommandSet& trim) {
  Allocation a;
  a.raw = {trim[0] + U1, trim[1] + rho * U2, trim[2] + (1.0 - rho) * U2};
  for (std::size_t i = 0; i < 3; ++i) {
    a.commands[i] = std::clamp(a.raw[i], 0.0, 1.0);
    a.saturated[i] = a.commands[i] != a.raw[i];
  }
  return a;
}

void PidGains::validate() const {
  if (!(integral_limit > 0.0)) throw ConfigError("PID integral limit must be > 0");
  if (!(derivative_filter >= 0.0)) throw ConfigError("PID derivative filter must be >= 0");
  if (direction != 1.0 && direction != -1.0) throw ConfigError("PID direction must be +1 or -1");
}

PidOutput pid_step(const PidState& state, double setpoint, double measurement,
                   const PidGains& g, double trim, double dt) {
  if (!(dt > 0.0)) throw DomainError("PID step dt must be > 0");
  PidOutput out;
  PidState s = state;
  if (!s.primed) {
    s.prev_measurement = measurement;
    s.derivative = 0.0;
    s.primed = true;
  }
  const double error = g.direction * (setpoint - measurement);
  const double raw_rate = -g.direction * (measurement - s.prev_measurement) / dt;
  const double a = g.derivative_filter > 0.0 ? dt / (g.derivative_filter + dt) : 1.0;
  s.derivative += a * (raw_rate - s.derivative);
  s.prev_measurement = measurement;

  auto output = [&](double integral) {
    return trim + g.kp * error + g.ki * integral + g.kd * s.derivative;
  };
  const double i_max = g.ki > 0.0 ? g.integral_limit / g.ki : 0.0;
  const double candidate = std::clamp(s.integral + error * dt, -i_max, i_max);
  const double u_try = output(candidate);
  const bool pushing_high = u_try > 1.0 && error > 0.0;
  const bool pushing_low = u_try < 0.0 && error < 0.0;
  if (!pushing_high && !pushing_low) s.integral = candidate;

  const double u = output(s.integral);
  out.command = std::clamp(u, 0.0, 1.0);
  out.saturated = out.command != u;
  out.state = s;
  return out;
}

ValveCommandSet saturate_and_rate_limit(const ValveCommandSet& cmds, const ValveCommandSet& prev,
                                        double dt, double rate_max) {
  if (!(dt > 0.0)) throw DomainError("rate limiter dt must be > 0");
  const double step = rate_max * dt;
  ValveCommandSet out{};
  for (std::size_t i = 0; i < 3; ++i) {
    const double c = std::clamp(cmds[i], 0.0, 1.0);
    out[i] = std::clamp(c, prev[i] - step, prev[i] + step);
    out[i] = std::clamp(out[i], 0.0, 1.0);
  }
  return out;
}

}  // namespace altstand::control
