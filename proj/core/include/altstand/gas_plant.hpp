#pragma once

// Lumped-parameter model of the two-chamber intake: supply manifold -> V1,
// V1 -> ambient through Valve_air, V1 -> V2 through Valve1 and Valve2, and
// V2 -> engine through the scenario-driven extraction flow.
//
// Units are SI throughout (Pa, K, kg/s, m, s).

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace altstand::plant {

struct GasConstants {
  double R = 287.06;   // J/(kg K)
  double cp = 1004.5;  // J/(kg K)

  double cv() const { return cp - R; }
  void validate() const;
};

struct ChamberState {
  double P = 0.0;  // Pa
  double T = 0.0;  // K
};

struct ChamberGeometry {
  double volume = 0.0;  // m^3
};

struct FlowResult {
  double mdot = 0.0;  // kg/s, source -> sink
  double h = 0.0;     // J/kg
  double c = 0.0;     // m/s

  double total_enthalpy() const { return h + 0.5 * c * c; }
};

struct BoundaryConditions {
  double P_in = 150.0e3;
  double T_in = 253.0;
  double P_amb = 101.325e3;
  double T_amb = 288.0;
  double P_engine = 0.0;  // informational; extraction is flow-specified
  double Q1 = 0.0;        // W
  double Q2 = 0.0;        // W
  double mdot_out = 0.0;  // kg/s

  void validate() const;
};

/// Pressure sensitivities to the valve flows around an operating point:
///   dP1/dt = -a1 mdot_1 - a2 mdot_2 - a_air mdot_air + f1
///   dP2/dt =  b1 mdot_1 + b2 mdot_2 + f2
/// in Pa/s per kg/s.
struct LinearizedCoeffs {
  double a1 = 0.0;
  double a2 = 0.0;
  double a_air = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
};

/// Index of a valve in every 3-vector of commands or positions.
enum ValveIndex : std::size_t { kAir = 0, kValve1 = 1, kValve2 = 2 };
inline constexpr std::size_t kValveCount = 3;

struct ValveSpec {
  double diameter = 1.0;  // m
  double tau = 1.0;       // s
  double delay = 0.0;     // s
};

/// One actuated valve: hydraulic positioner modelled as a pure transport
/// delay on the command followed by a first-order lag.
class ValveUnit {
 public:
  ValveUnit() = default;
  ValveUnit(const ValveSpec& spec, double dt, double initial_opening);

  const ValveSpec& spec() const { return spec_; }
  double dt() const { return dt_; }
  double cmd() const { return cmd_; }
  double pos() const { return pos_; }
  std::size_t delay_steps() const { return history_.size(); }

  /// Command that leaves the delay line if `cmd` is pushed now.
  double delayed_command_after_push(double cmd) const;
  /// Pushes `cmd` and returns the command that left the delay line.
  double push(double cmd);
  void set_pos(double pos) { pos_ = pos; }

 private:
  ValveSpec spec_{};
  double dt_ = 0.0;
  double cmd_ = 0.0;
  double pos_ = 0.0;
  std::vector<double> history_;  // ring buffer, oldest at head_
  std::size_t head_ = 0;
};

struct PlantParams {
  GasConstants gas{};
  ChamberGeometry v1{300.0};
  ChamberGeometry v2{800.0};
  std::array<ValveSpec, kValveCount> valves{
      ValveSpec{2.6, 2.5, 0.15},  // Valve_air
      ValveSpec{2.6, 2.5, 0.15},  // Valve1
      ValveSpec{1.2, 1.5, 0.15},  // Valve2
  };
  double supply_area = 3.36;  // m^2, equivalent supply orifice

  void validate() const;
};

struct PlantState {
  double t = 0.0;
  ChamberState c1{};
  ChamberState c2{};
  std::array<ValveUnit, kValveCount> valves{};
};

struct PlantFlows {
  FlowResult in{};
  FlowResult air{};
  FlowResult v1{};
  FlowResult v2{};
  FlowResult out{};
};

struct ChamberRates {
  double dP1 = 0.0;
  double dT1 = 0.0;
  double dP2 = 0.0;
  double dT2 = 0.0;
};

/// Thrown when an integration step leaves the physical domain (P or T <= 0,
/// or non-finite). Carries the pre-step state for diagnosis.
class IntegrationFault : public std::runtime_error {
 public:
  IntegrationFault(const std::string& what, PlantState snapshot)
      : std::runtime_error(what), snapshot_(std::move(snapshot)) {}
  const PlantState& snapshot() const { return snapshot_; }
  double time() const { return snapshot_.t; }

 private:
  PlantState snapshot_;
};

inline constexpr double kChokedFlowCoefficient = 0.65;
inline constexpr double kHeatCapacityRatio = 1.4;

/// Installed flow area of a valve, linear in opening fraction.
double valve_area(double pos, double diameter);

/// Pressure-ratio dependent flow coefficient for the generalized valve flow
/// law. Isentropic converging-nozzle shape scaled so the choked plateau is
/// kChokedFlowCoefficient. The area argument is accepted for interface
/// stability; the surrogate does not depend on it.
double flow_coefficient(double p_up, double p_down, double area);

/// Critical (choking) pressure ratio for kHeatCapacityRatio.
double critical_pressure_ratio();

/// mdot = phi * A * p_up * sqrt(2 / (R T_up)); h = cp T_up.
FlowResult valve_mass_flow(double p_up, double T_up, double p_down, double area,
                           const GasConstants& gas);

/// Advances one valve by dt: pushes `cmd` through the delay line, then applies
/// the exact first-order update towards the delayed command.
ValveUnit valve_actuation_step(ValveUnit v, double cmd, double dt);

/// Right-hand sides of the chamber pressure/temperature equations. Stream
/// enthalpies are taken from the FlowResults (source-station convention).
ChamberRates chamber_rates(const ChamberState& s1, const ChamberState& s2,
                           const PlantFlows& flows, const BoundaryConditions& bc,
                           const GasConstants& gas, const ChamberGeometry& g1,
                           const ChamberGeometry& g2);

/// Flows for given chamber states and valve openings.
PlantFlows compute_flows(const ChamberState& s1, const ChamberState& s2,
                         const std::array<double, kValveCount>& openings,
                         const BoundaryConditions& bc, const PlantParams& params);

PlantFlows compute_flows(const PlantState& state, const BoundaryConditions& bc,
                         const PlantParams& params);

/// One fixed step: valves advance through their delay lines, chamber states
/// advance by classical RK4 with the valve lag integrated exactly inside the
/// stages. Throws IntegrationFault if the result is nonphysical.
PlantState plant_step(const PlantState& state,
                      const std::array<double, kValveCount>& valve_cmds,
                      const BoundaryConditions& bc, const PlantParams& params,
                      double dt);

/// Fresh plant at the given chamber states with all valves resting at
/// `openings` (command history filled with the same values).
PlantState make_plant_state(const ChamberState& c1, const ChamberState& c2,
                            const std::array<double, kValveCount>& openings,
                            const PlantParams& params, double dt);

/// Chamber mass P V / (R T).
double chamber_mass(const ChamberState& s, const ChamberGeometry& g,
                    const GasConstants& gas);

/// Sensitivities of the chamber pressure rates to the valve flows, derived
/// consistently from the pressure equations with zero kinetic energy.
LinearizedCoeffs linearized_coeffs(const ChamberState& s1, const ChamberState& s2,
                                   const GasConstants& gas,
                                   const ChamberGeometry& g1,
                                   const ChamberGeometry& g2);

/// d mdot / d opening for a valve at fixed upstream/downstream state.
double flow_sensitivity_to_opening(double p_up, double T_up, double p_down,
                                   double diameter, const GasConstants& gas);

struct TrimResult {
  std::array<double, kValveCount> openings{};
  bool feasible = false;
};

/// Steady-state openings that balance both chambers at (P1, P2) for the given
/// boundary flows. Valve1 and Valve2 share one opening. Bisection; when no
/// opening balances a chamber the result is clamped and marked infeasible.
TrimResult solve_trim(const ChamberState& s1, const ChamberState& s2,
                      const BoundaryConditions& bc, const PlantParams& params);

}  // namespace altstand::plant
