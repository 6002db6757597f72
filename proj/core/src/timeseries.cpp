#include "altstand/timeseries.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace altstand::harness {

namespace {

constexpr std::size_t kColumns = 26;

std::array<double, kColumns> flatten(const TickRecord& r) {
  return {r.t,        r.p1_true,  r.p2_true, r.p1_meas,  r.p2_meas,  r.p1_set,  r.p2_set,
          r.t1,       r.t2,       r.cmd[0],  r.cmd[1],   r.cmd[2],   r.act[0],  r.act[1],
          r.act[2],   r.mdot_in,  r.mdot_air, r.mdot_1,  r.mdot_2,   r.mdot_out, r.z13,
          r.z23,      r.grad_l1,  r.grad_l2, r.gamma,    r.L};
}

TickRecord unflatten(const std::array<double, kColumns>& v) {
  TickRecord r;
  r.t = v[0];
  r.p1_true = v[1];
  r.p2_true = v[2];
  r.p1_meas = v[3];
  r.p2_meas = v[4];
  r.p1_set = v[5];
  r.p2_set = v[6];
  r.t1 = v[7];
  r.t2 = v[8];
  r.cmd = {v[9], v[10], v[11]};
  r.act = {v[12], v[13], v[14]};
  r.mdot_in = v[15];
  r.mdot_air = v[16];
  r.mdot_1 = v[17];
  r.mdot_2 = v[18];
  r.mdot_out = v[19];
  r.z13 = v[20];
  r.z23 = v[21];
  r.grad_l1 = v[22];
  r.grad_l2 = v[23];
  r.gamma = v[24];
  r.L = v[25];
  return r;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string timeseries_to_csv(const TimeSeries& series) {
  std::string out = kTimeSeriesHeader;
  out += '\n';
  out.reserve(series.size() * kColumns * 12);
  char buf[32];
  for (const auto& rec : series) {
    const auto row = flatten(rec);
    for (std::size_t i = 0; i < kColumns; ++i) {
      if (i) out += ',';
      const auto res = std::to_chars(buf, buf + sizeof buf, row[i]);
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  return out;
}

void write_timeseries(const TimeSeries& series, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  const std::string text = timeseries_to_csv(series);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw std::runtime_error("write failed for '" + path.string() + "'");
}

TimeSeries read_timeseries(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  std::string line;
  if (!std::getline(f, line) || line != kTimeSeriesHeader) {
    throw std::runtime_error("'" + path.string() + "' does not start with the time-series header");
  }
  TimeSeries series;
  std::size_t lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::array<double, kColumns> row{};
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (std::size_t i = 0; i < kColumns; ++i) {
      const auto res = std::from_chars(p, end, row[i]);
      if (res.ec != std::errc{}) {
        throw std::runtime_error("'" + path.string() + "' line " + std::to_string(lineno) +
                                 ": bad number in column " + std::to_string(i + 1));
      }
      p = res.ptr;
      if (i + 1 < kColumns) {
        if (p == end || *p != ',') {
          throw std::runtime_error("'" + path.string() + "' line " + std::to_string(lineno) +
                                   ": expected " + std::to_string(kColumns) + " columns");
        }
        ++p;
      }
    }
    if (p != end) {
      throw std::runtime_error("'" + path.string() + "' line " + std::to_string(lineno) +
                               ": trailing data");
    }
    series.push_back(unflatten(row));
  }
  return series;
}

}  // namespace altstand::harness
