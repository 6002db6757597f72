#pragma once

#include <array>
#include <cstddef>

#include "altstand/config.hpp"

namespace altstand::harness {

struct RelayTuneOptions {
  double relay_amplitude = 0.05;  // opening fraction around trim
  double duration = 200.0;        // s
  double mdot_out = 370.0;        // kg/s, nominal extraction
  double detune = 0.5;            // applied to every Ziegler-Nichols gain
  std::size_t periods_averaged = 4;
  // Relay switching uses the noisy measurement with this hysteresis band
  // (kPa, at least the noise bound); zero runs the experiment noise free.
  double hysteresis = 2.0;
};

struct RelayTuneResult {
  double ku = 0.0;         // ultimate gain, opening per kPa
  double tu = 0.0;         // ultimate period, s
  double amplitude = 0.0;  // kPa, half peak-to-peak of the limit cycle
  control::PidGains gains{};
  bool ok = false;
};

/// Relay (Astrom-Hagglund) experiment on the plant at the scenario's initial
/// setpoints. Loop 0 drives Valve_air against P1, loops 1
/// and 2 drive Valve1 or Valve2 against P2 with the other valves at trim.
/// Ku = 4 h / (pi a); classic Ziegler-Nichols PID (0.6 Ku, 1.2 Ku / Tu,
/// 0.075 Ku Tu) scaled by `detune`.
RelayTuneResult relay_autotune(const SimConfig& cfg, std::size_t loop,
                               const RelayTuneOptions& opts = {});

/// Runs relay_autotune for all three loops and returns the tuned gain set.
std::array<RelayTuneResult, 3> relay_autotune_all(const SimConfig& cfg,
                                                  const RelayTuneOptions& opts = {});

}  // namespace altstand::harness
