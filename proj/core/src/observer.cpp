#include "altstand/observer.hpp"

#include <cmath>

#include "altstand/errors.hpp"

namespace altstand::observer {

std::array<double, 3> eso_gains_from_bandwidth(double omega) {
  if (!(omega > 0.0)) throw DomainError("observer bandwidth must be > 0");
  return {3.0 * omega, 3.0 * omega * omega, omega * omega * omega};
}

EsoConfig EsoConfig::from_bandwidth(double omega, const std::array<double, 3>& b_row) {
  return {omega, b_row, eso_gains_from_bandwidth(omega)};
}

EsoState eso_step(const EsoState& s, double y, const std::array<double, 3>& u,
                  const EsoConfig& cfg, double dt) {
  if (!(dt > 0.0)) throw ConfigError("observer step dt must be > 0");
  if (dt * cfg.omega > 0.2 + 1e-12) {
    throw ConfigError("observer discretization guard violated: dt * omega must be <= 0.2");
  }
  const double e = s.z1 - y;
  const double bu = cfg.b_row[0] * u[0] + cfg.b_row[1] * u[1] + cfg.b_row[2] * u[2];
  EsoState n;
  n.z1 = s.z1 + dt * (s.z2 - cfg.beta[0] * e);
  n.z2 = s.z2 + dt * (s.z3 - cfg.beta[1] * e + bu);
  n.z3 = s.z3 + dt * (-cfg.beta[2] * e);
  return n;
}

double fhan(double x1, double x2, double r, double h0) {
  const double d = r * h0;
  const double d0 = h0 * d;
  const double y = x1 + h0 * x2;
  const double a0 = std::sqrt(d * d + 8.0 * r * std::abs(y));
  const double a = std::abs(y) > d0 ? x2 + 0.5 * (a0 - d) * (y > 0.0 ? 1.0 : -1.0) : x2 + y / h0;
  if (std::abs(a) > d) return -r * (a > 0.0 ? 1.0 : -1.0);
  return -r * a / d;
}

TdState TdState::at_rest(double value, double r, double h) {
  if (!(r > 0.0 && h > 0.0)) throw ConfigError("tracking differentiator needs r > 0 and h > 0");
  return {value, 0.0, r, h};
}

TdState td_step(const TdState& s, double setpoint, double dt) {
  if (!(dt > 0.0)) throw DomainError("tracking differentiator step dt must be > 0");
  TdState n = s;
  n.v1 = s.v1 + dt * s.v2;
  n.v2 = s.v2 + dt * fhan(s.v1 - setpoint, s.v2, s.r, s.h);
  return n;
}

}  // namespace altstand::observer
