#pragma once

// Simulation configuration and its INI-style text form.
//
// The file is sectioned key = value text with units in key names, e.g.
//
//   [plant]
//   v1_volume_m3 = 300
//   [scenario]
//   preset = physical
//
// Unknown sections or keys are rejected. See configs/paper.cfg for the full
// key set.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "altstand/control.hpp"
#include "altstand/gas_plant.hpp"
#include "altstand/penalty.hpp"
#include "altstand/scenario.hpp"

namespace altstand::harness {

enum class ControllerKind { kAdrc, kPid };
std::string to_string(ControllerKind k);
ControllerKind controller_from_string(const std::string& s);

struct AdrcSettings {
  control::AdrcGains gains{};
  double omega1 = 2.0;  // rad/s
  double omega2 = 5.0;  // rad/s
  double td_speed = 10.0;
  double td_step_factor = 2.0;  // filter step h0 = factor * dt
  // Effective gains are derived at this operating point unless overridden.
  double nominal_p1_kpa = 130.0;
  double nominal_p2_kpa = 65.0;
  bool b_eff_override = false;
};

struct PidSettings {
  // (Valve_air on P1, Valve1 on P2, Valve2 on P2)
  std::array<control::PidGains, 3> loops{};
};

struct OfflineSolveSettings {
  penalty::PenaltyProblem problem{};
  std::array<double, 2> start{60.0, 140.0};
};

struct MetricsWindow {
  double start = 250.0;
  double end = 300.0;
  double settle_band_kpa = 0.5;
};

struct SimConfig {
  plant::PlantParams plant{};
  plant::BoundaryConditions boundary{};
  ControllerKind controller = ControllerKind::kAdrc;
  double rate_max = 0.4;  // 1/s, valve command slew limit
  AdrcSettings adrc{};
  PidSettings pid{};
  penalty::PenaltyProblem penalty{};  // online coordination parameters
  penalty::CoordinatorSchedule schedule{};
  OfflineSolveSettings offline{};
  scenario::Scenario scenario = scenario::paper_scenario();
  MetricsWindow window{};
  std::string output_dir = "out";

  void validate() const;
};

/// Built-in defaults (identical to configs/paper.cfg).
SimConfig default_config();

SimConfig parse_config(std::string_view text);
SimConfig load_config(const std::filesystem::path& path);
std::string to_config_text(const SimConfig& cfg);

}  // namespace altstand::harness
