#pragma once

#include <array>
#include <string>
#include <vector>

#include "altstand/timeseries.hpp"

namespace altstand::harness {

struct MetricsOptions {
  double eps1 = 5.0;  // kPa
  double eps2 = 3.0;  // kPa
  double window_start = 250.0;
  double window_end = 300.0;
  double settle_band = 0.5;  // kPa
};

struct RunMetrics {
  double rmse_v1 = 0.0;
  double rmse_v2 = 0.0;
  double max_abs_err_v1 = 0.0;
  double max_abs_err_v2 = 0.0;
  std::array<double, 3> valve_p2p{};  // actual openings inside the window
  double constraint_violation_time = 0.0;  // s with |e1| > eps1 or |e2| > eps2
  // Time after window_start until |e2| stays inside settle_band; negative if
  // it never settles before the window ends.
  double settling_time_v2 = 0.0;
  std::size_t samples = 0;

  double max_valve_p2p() const;
};

/// Errors are true pressure minus setpoint. Throws DomainError on an empty
/// series.
RunMetrics compute_metrics(const TimeSeries& series, const MetricsOptions& opts);

struct PhaseMetrics {
  std::string name;
  double t0 = 0.0;
  double t1 = 0.0;
  RunMetrics metrics{};
};

/// Metrics over (0-100), (100-250) and (250-300) s; phases without samples
/// are omitted.
std::vector<PhaseMetrics> phase_metrics(const TimeSeries& series, const MetricsOptions& opts);

}  // namespace altstand::harness
