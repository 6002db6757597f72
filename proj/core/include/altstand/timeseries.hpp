#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace altstand::harness {

/// One logged control tick. Pressures in kPa, flows in kg/s, time in s.
struct TickRecord {
  double t = 0.0;
  double p1_true = 0.0;
  double p2_true = 0.0;
  double p1_meas = 0.0;
  double p2_meas = 0.0;
  double p1_set = 0.0;
  double p2_set = 0.0;
  double t1 = 0.0;  // K
  double t2 = 0.0;  // K
  std::array<double, 3> cmd{};  // (air, valve1, valve2)
  std::array<double, 3> act{};
  double mdot_in = 0.0;
  double mdot_air = 0.0;
  double mdot_1 = 0.0;
  double mdot_2 = 0.0;
  double mdot_out = 0.0;
  double z13 = 0.0;
  double z23 = 0.0;
  double grad_l1 = 0.0;
  double grad_l2 = 0.0;
  double gamma = 0.0;
  double L = 0.0;
};

using TimeSeries = std::vector<TickRecord>;

inline constexpr const char* kTimeSeriesHeader =
    "t,p1_true,p2_true,p1_meas,p2_meas,p1_set,p2_set,t1,t2,"
    "vp_air_cmd,vp1_cmd,vp2_cmd,vp_air_act,vp1_act,vp2_act,"
    "mdot_in,mdot_air,mdot_1,mdot_2,mdot_out,z13,z23,grad_l1,grad_l2,gamma,L";

/// Shortest round-trip text for a double, locale independent.
std::string format_double(double v);

std::string timeseries_to_csv(const TimeSeries& series);
/// Writes the CSV; throws std::runtime_error naming the path on failure.
void write_timeseries(const TimeSeries& series, const std::filesystem::path& path);
TimeSeries read_timeseries(const std::filesystem::path& path);

}  // namespace altstand::harness
