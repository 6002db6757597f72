#pragma once

#include <array>
#include <optional>
#include <string>

#include "altstand/config.hpp"
#include "altstand/metrics.hpp"
#include "altstand/timeseries.hpp"

namespace altstand::harness {

struct FaultRecord {
  double t = 0.0;
  std::string message;
};

struct RunInfo {
  std::array<double, 3> trim{};
  bool trim_feasible = false;
  double b_eff1 = 0.0;  // kPa/s^2 per unit opening
  double b_eff2 = 0.0;
  double wall_seconds = 0.0;
};

struct SimResult {
  TimeSeries series;
  RunMetrics metrics{};
  std::vector<PhaseMetrics> phases;
  std::optional<FaultRecord> fault;
  RunInfo info{};
};

/// Effective control gains from the linearized plant at the configured
/// nominal point, unless the config overrides them.
std::array<double, 2> effective_gains(const SimConfig& cfg);

/// Fixed-step loop. Each tick: scenario -> noise -> ESO -> TD -> coordinator
/// -> controller -> saturation and rate limit -> log -> plant step.
/// A plant fault ends the run early with the series so far and a fault record.
SimResult run_simulation(const SimConfig& cfg);

/// JSON run metadata (controller, scenario, dt, seed, derivative-sign
/// choice, trim, gains, fault, metrics).
std::string run_metadata_json(const SimConfig& cfg, const SimResult& result);

}  // namespace altstand::harness
