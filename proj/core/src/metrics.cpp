#include "altstand/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "altstand/errors.hpp"

namespace altstand::harness {

double RunMetrics::max_valve_p2p() const {
  return *std::max_element(valve_p2p.begin(), valve_p2p.end());
}

RunMetrics compute_metrics(const TimeSeries& series, const MetricsOptions& opts) {
  if (series.empty()) throw DomainError("cannot compute metrics of an empty series");
  RunMetrics m;
  m.samples = series.size();
  double s1 = 0.0, s2 = 0.0;
  std::array<double, 3> lo;
  std::array<double, 3> hi;
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(-std::numeric_limits<double>::infinity());
  bool in_window = false;
  double last_unsettled = -1.0;
  const double dt = series.size() > 1 ? series[1].t - series[0].t : 0.0;
  for (const auto& r : series) {
    const double e1 = r.p1_true - r.p1_set;
    const double e2 = r.p2_true - r.p2_set;
    s1 += e1 * e1;
    s2 += e2 * e2;
    m.max_abs_err_v1 = std::max(m.max_abs_err_v1, std::abs(e1));
    m.max_abs_err_v2 = std::max(m.max_abs_err_v2, std::abs(e2));
    if (std::abs(e1) > opts.eps1 || std::abs(e2) > opts.eps2) m.constraint_violation_time += dt;
    if (r.t >= opts.window_start && r.t <= opts.window_end) {
      in_window = true;
      for (std::size_t i = 0; i < 3; ++i) {
        lo[i] = std::min(lo[i], r.act[i]);
        hi[i] = std::max(hi[i], r.act[i]);
      }
      if (std::abs(e2) > opts.settle_band) last_unsettled = r.t;
    }
  }
  const auto n = static_cast<double>(series.size());
  m.rmse_v1 = std::sqrt(s1 / n);
  m.rmse_v2 = std::sqrt(s2 / n);
  if (in_window) {
    for (std::size_t i = 0; i < 3; ++i) m.valve_p2p[i] = hi[i] - lo[i];
    const double last_t = std::min(series.back().t, opts.window_end);
    if (last_unsettled < 0.0) {
      m.settling_time_v2 = 0.0;
    } else if (last_unsettled >= last_t) {
      m.settling_time_v2 = -1.0;
    } else {
      m.settling_time_v2 = last_unsettled + dt - opts.window_start;
    }
  }
  return m;
}

std::vector<PhaseMetrics> phase_metrics(const TimeSeries& series, const MetricsOptions& opts) {
  const std::array<PhaseMetrics, 3> phases{PhaseMetrics{"phase1", 0.0, 100.0, {}},
                                           PhaseMetrics{"phase2", 100.0, 250.0, {}},
                                           PhaseMetrics{"phase3", 250.0, 300.0, {}}};
  std::vector<PhaseMetrics> out;
  for (auto p : phases) {
    TimeSeries part;
    for (const auto& r : series) {
      const bool last = p.t1 >= 300.0;
      if (r.t >= p.t0 && (r.t < p.t1 || (last && r.t <= p.t1))) part.push_back(r);
    }
    if (part.empty()) continue;
    p.metrics = compute_metrics(part, opts);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace altstand::harness
