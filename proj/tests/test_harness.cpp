#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "altstand/config.hpp"
#include "altstand/errors.hpp"
#include "altstand/metrics.hpp"
#include "altstand/simulation.hpp"
#include "altstand/timeseries.hpp"
#include "doctest.h"

using namespace altstand::harness;
using doctest::Approx;

namespace {

TimeSeries constant_error_series(double e1, double e2, std::size_t n) {
  TimeSeries s;
  for (std::size_t k = 0; k < n; ++k) {
    TickRecord r;
    r.t = 250.0 + 0.01 * static_cast<double>(k);
    r.p1_set = 65.0;
    r.p2_set = 130.0;
    r.p1_true = 65.0 + e1;
    r.p2_true = 130.0 + e2;
    r.act = {0.3, 0.4, 0.5};
    s.push_back(r);
  }
  return s;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("altstand_test_" + name);
}

}  // namespace

TEST_CASE("metrics") {
  MetricsOptions opts;
  SUBCASE("constant error") {
    const auto m = compute_metrics(constant_error_series(1.0, -1.0, 5001), opts);
    CHECK(m.rmse_v1 == Approx(1.0));
    CHECK(m.max_abs_err_v1 == Approx(1.0));
    CHECK(m.rmse_v2 == Approx(1.0));
    CHECK(m.max_abs_err_v2 == Approx(1.0));
    CHECK(m.valve_p2p[0] == 0.0);
    CHECK(m.max_valve_p2p() == 0.0);
    CHECK(m.constraint_violation_time == 0.0);
  }
  SUBCASE("sinusoid") {
    const double A = 2.5;
    auto s = constant_error_series(0.0, 0.0, 50001);
    for (auto& r : s) {
      r.t = 250.0 + (r.t - 250.0) / 10.0;
      r.p2_true = 130.0 + A * std::sin(2.0 * std::numbers::pi * (r.t - 250.0) + std::numbers::pi / 4);
    }
    const auto m = compute_metrics(s, opts);
    CHECK(std::abs(m.rmse_v2 - A / std::sqrt(2.0)) < 1e-6);
    CHECK(m.max_abs_err_v2 == Approx(A).epsilon(1e-6));
  }
  SUBCASE("valve peak-to-peak and violations") {
    auto s = constant_error_series(0.0, 4.0, 101);
    s[10].act[2] = 0.7;
    s[20].act[2] = 0.45;
    const auto m = compute_metrics(s, opts);
    CHECK(m.valve_p2p[2] == Approx(0.25));
    CHECK(m.constraint_violation_time > 0.0);
  }
  CHECK_THROWS_AS(compute_metrics({}, opts), altstand::DomainError);
}

TEST_CASE("timeseries CSV") {
  TimeSeries s = constant_error_series(0.1, 0.2, 3);
  s[1].p1_true = 1.0 / 3.0;
  s[2].L = 1.2345678901234567e-8;
  const auto text = timeseries_to_csv(s);
  std::size_t lines = 0;
  for (char c : text) lines += c == '\n';
  CHECK(lines == 4);
  CHECK(text.substr(0, text.find('\n')) == kTimeSeriesHeader);

  const auto path = temp_path("roundtrip.csv");
  write_timeseries(s, path);
  const auto back = read_timeseries(path);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(back[i].p1_true - s[i].p1_true) < 1e-9);
    CHECK(std::abs(back[i].p2_true - s[i].p2_true) < 1e-9);
    CHECK(back[i].L == s[i].L);
  }
  std::filesystem::remove(path);
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("config") {
  const auto def = default_config();
  CHECK_NOTHROW(def.validate());
  CHECK(to_config_text(parse_config(to_config_text(def))) == to_config_text(def));

  const auto c = parse_config("[controller]\ntype = pid\n[scenario]\npreset = physical\n");
  CHECK(c.controller == ControllerKind::kPid);
  CHECK(c.scenario.name == "physical");

  CHECK_THROWS_AS(parse_config("[plant]\nbogus_key = 1\n"), altstand::ConfigError);
  CHECK_THROWS_AS(parse_config("[nowhere]\nx = 1\n"), altstand::ConfigError);
  CHECK_THROWS_AS(parse_config("[plant]\nv1_volume_m3 = 3x0\n"), altstand::ConfigError);
  CHECK_THROWS_AS(parse_config("[plant]\nv1_volume_m3 = -1\n"), altstand::ConfigError);
  CHECK_THROWS_AS(load_config(temp_path("does_not_exist.cfg")), altstand::ConfigError);

  const auto derived = parse_config("[adrc]\nb_eff1_kpa_s2 = derived\nb_eff2_kpa_s2 = derived\n");
  CHECK_FALSE(derived.adrc.b_eff_override);
  CHECK(to_config_text(parse_config(to_config_text(derived))) == to_config_text(derived));
  CHECK(def.adrc.b_eff_override);
  CHECK_THROWS_AS(parse_config("[adrc]\nb_eff1_kpa_s2 = derived\nb_eff2_kpa_s2 = 57.9\n"), altstand::ConfigError);
  CHECK_THROWS_AS(parse_config("[adrc]\nb_eff1_kpa_s2 = -58\n"), altstand::ConfigError);
}

TEST_CASE("noise-free equilibrium hold") {
  SimConfig c = default_config();
  c.scenario = altstand::scenario::physical_scenario();
  c.scenario.noise.press_bound = 0.0;
  c.scenario.duration = 10.0;
  c.scenario.p1_set = altstand::scenario::PiecewiseLinearProfile({{0.0, 130.0}});
  c.scenario.p2_set = altstand::scenario::PiecewiseLinearProfile({{0.0, 65.0}});
  c.scenario.mdot_out = altstand::scenario::PiecewiseLinearProfile({{0.0, 370.0}});
  for (auto kind : {ControllerKind::kAdrc, ControllerKind::kPid}) {
    c.controller = kind;
    const auto r = run_simulation(c);
    CHECK_FALSE(r.fault.has_value());
    CHECK(r.series.size() == 1001);
    CHECK(r.metrics.max_abs_err_v1 < 1e-6);
    CHECK(r.metrics.max_abs_err_v2 < 1e-6);
  }
}

TEST_CASE("short runs are deterministic") {
  SimConfig c = default_config();
  c.scenario = altstand::scenario::physical_scenario();
  c.scenario.duration = 5.0;
  const auto a = run_simulation(c);
  const auto b = run_simulation(c);
  CHECK(timeseries_to_csv(a.series) == timeseries_to_csv(b.series));
  CHECK(run_metadata_json(c, a) == run_metadata_json(c, b));
}
