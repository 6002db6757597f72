#pragma once

#include <array>

namespace altstand::observer {

/// Observer gains (3w, 3w^2, w^3) placing all three error poles at -w.
std::array<double, 3> eso_gains_from_bandwidth(double omega);

struct EsoConfig {
  double omega = 1.0;
  std::array<double, 3> b_row{};  // maps (vp_air, vp1, vp2) offsets into the 2nd-derivative channel
  std::array<double, 3> beta{3.0, 3.0, 1.0};

  static EsoConfig from_bandwidth(double omega, const std::array<double, 3>& b_row);
};

/// z1 ~ y, z2 ~ dy/dt, z3 ~ total disturbance acting on d2y/dt2.
struct EsoState {
  double z1 = 0.0;
  double z2 = 0.0;
  double z3 = 0.0;
};

/// Linear third-order extended state observer, forward-Euler discretized:
///   e = z1 - y
///   z1' = z2 - b1 e
///   z2' = z3 - b2 e + b_row . u
///   z3' = -b3 e
/// `u` holds the valve command offsets from trim. Requires dt * omega <= 0.2.
EsoState eso_step(const EsoState& s, double y, const std::array<double, 3>& u,
                  const EsoConfig& cfg, double dt);

/// Discrete time-optimal synthesis function (Han). Bounded by r in magnitude.
double fhan(double x1, double x2, double r, double h0);

struct TdState {
  double v1 = 0.0;  // tracked setpoint
  double v2 = 0.0;  // tracked derivative
  double r = 10.0;  // speed factor (acceleration bound)
  double h = 0.02;  // filter step h0

  static TdState at_rest(double value, double r, double h);
};

/// Second-order tracking differentiator:
///   v1 <- v1 + dt v2
///   v2 <- v2 + dt fhan(v1 - setpoint, v2, r, h)
TdState td_step(const TdState& s, double setpoint, double dt);

}  // namespace altstand::observer
