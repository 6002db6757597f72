#pragma once

#include <array>

#include "altstand/observer.hpp"

namespace altstand::control {

/// Sign of the derivative term in the cooperative PD law.
///   kAsPrinted:    u_c = k1 (r - z1) - k2 (dr - z2) - k3 gradL
///   kConventional: u_c = k1 (r - z1) + k2 (dr - z2) - k3 gradL
enum class PdSign { kAsPrinted, kConventional };

struct AdrcGains {
  double k11 = 0.001, k12 = 0.0001, k13 = 0.1;
  double k21 = 0.04, k22 = 0.04, k23 = 1.0;
  double b_eff1 = 1.0;  // kPa/s^2 per unit virtual command, chamber V1
  double b_eff2 = 1.0;  // chamber V2
  double rho = 0.5;     // share of the V2 virtual command sent to Valve1
  PdSign pd_sign = PdSign::kConventional;

  void validate() const;
};

struct AdrcOutput {
  double u_c1 = 0.0;
  double u_c2 = 0.0;
  double U1 = 0.0;
  double U2 = 0.0;
};

/// Cooperative PD law with disturbance compensation, U_i = (u_ci - z_i3) / b_eff_i.
AdrcOutput adrc_command(const observer::EsoState& z_v1, const observer::EsoState& z_v2,
                        const observer::TdState& td_v1, const observer::TdState& td_v2,
                        const std::array<double, 2>& grad_l, const AdrcGains& gains);

/// Valve openings in (vp_air, vp1, vp2) order.
using ValveCommandSet = std::array<double, 3>;

struct Allocation {
  ValveCommandSet raw{};       // before saturation
  ValveCommandSet commands{};  // clamped to [0, 1]
  std::array<bool, 3> saturated{};
};

/// vp_air = trim_air + U1; vp1 = trim1 + rho U2; vp2 = trim2 + (1 - rho) U2.
Allocation allocate_valves(double U1, double U2, double rho, const ValveCommandSet& trim);

/// Row vectors that recover each chamber's virtual command from valve
/// offsets: (1, 0, 0) . d = U1 and (0, 1, 1) . d = U2 for any rho.
inline constexpr std::array<double, 3> kAllocationRowV1{1.0, 0.0, 0.0};
inline constexpr std::array<double, 3> kAllocationRowV2{0.0, 1.0, 1.0};

struct PidGains {
  double kp = 0.0;
  double ki = 0.0;   // 1/s
  double kd = 0.0;   // s
  double integral_limit = 0.5;  // bound on |ki * integral|, opening fraction
  double derivative_filter = 0.1;  // s, first-order filter on the derivative
  double direction = 1.0;          // +1: opening raises the pressure, -1: lowers it

  void validate() const;
};

struct PidState {
  double integral = 0.0;  // integral of the signed error
  double derivative = 0.0;
  double prev_measurement = 0.0;
  bool primed = false;
};

struct PidOutput {
  double command = 0.0;
  bool saturated = false;
  PidState state{};
};

/// Positional PID around a trim opening with derivative on the measurement
/// (first-order filtered) and conditional integration: the integral is frozen
/// while the output is saturated in the direction the error pushes it, and
/// the integral term is clamped to +-integral_limit.
PidOutput pid_step(const PidState& state, double setpoint, double measurement,
                   const PidGains& gains, double trim, double dt);

/// Clamps every command to [0, 1] and to |cmd - prev| <= rate_max dt.
ValveCommandSet saturate_and_rate_limit(const ValveCommandSet& cmds, const ValveCommandSet& prev,
                                        double dt, double rate_max);

}  // namespace altstand::control
