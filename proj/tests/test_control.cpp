#include <algorithm>
#include <cmath>

#include "altstand/control.hpp"
#include "altstand/errors.hpp"
#include "doctest.h"

using namespace altstand::control;
using altstand::observer::EsoState;
using altstand::observer::TdState;
using doctest::Approx;

namespace {

AdrcGains table_gains() {
  AdrcGains g;
  g.k11 = 0.001;
  g.k12 = 0.0001;
  g.k13 = 0.1;
  g.k21 = 0.04;
  g.k22 = 0.04;
  g.k23 = 1.0;
  g.b_eff1 = -50.0;
  g.b_eff2 = 40.0;
  return g;
}

}  // namespace

TEST_CASE("ADRC law") {
  const auto g = table_gains();
  TdState r1{65.0, 0.2}, r2{130.0, 0.0};

  SUBCASE("regulation equilibrium") {
    const auto out = adrc_command({65.0, 0.2, 0.0}, {130.0, 0.0, 0.0}, r1, r2, {0.0, 0.0}, g);
    CHECK(out.u_c1 == 0.0);
    CHECK(out.u_c2 == 0.0);
    CHECK(out.U1 == 0.0);
    CHECK(out.U2 == 0.0);
  }
  SUBCASE("disturbance cancellation") {
    const auto out = adrc_command({65.0, 0.2, 3.0}, {130.0, 0.0, -2.0}, r1, r2, {0.0, 0.0}, g);
    CHECK(out.U1 == Approx(-3.0 / g.b_eff1));
    CHECK(out.U2 == Approx(2.0 / g.b_eff2));
  }
  SUBCASE("proportional term") {
    const auto out = adrc_command({64.0, 0.2, 0.0}, {130.0, 0.0, 0.0}, r1, r2, {0.0, 0.0}, g);
    CHECK(out.u_c1 == Approx(0.001));
  }
  SUBCASE("derivative sign convention") {
    auto printed = g;
    printed.pd_sign = PdSign::kAsPrinted;
    const EsoState z1{65.0, 0.0, 0.0};
    const auto a = adrc_command(z1, {130.0, 0.0, 0.0}, r1, r2, {0.0, 0.0}, g);
    const auto b = adrc_command(z1, {130.0, 0.0, 0.0}, r1, r2, {0.0, 0.0}, printed);
    CHECK(a.u_c1 == Approx(0.0001 * 0.2));
    CHECK(b.u_c1 == Approx(-0.0001 * 0.2));
  }
  SUBCASE("penalty gradient coupling") {
    const auto out = adrc_command({65.0, 0.2, 0.0}, {130.0, 0.0, 0.0}, r1, r2, {2.0, -1.0}, g);
    CHECK(out.u_c1 == Approx(-0.2));
    CHECK(out.u_c2 == Approx(1.0));
  }
}

TEST_CASE("gain validation") {
  auto g = table_gains();
  CHECK_NOTHROW(g.validate());
  g.b_eff2 = 0.0;
  CHECK_THROWS_AS(g.validate(), altstand::ConfigError);
  g = table_gains();
  g.rho = 1.5;
  CHECK_THROWS_AS(g.validate(), altstand::ConfigError);
}

TEST_CASE("valve allocation") {
  const ValveCommandSet trim{0.3, 0.4, 0.5};
  const auto a = allocate_valves(0.0, 0.0, 0.5, trim);
  CHECK(a.commands == trim);

  const auto b = allocate_valves(0.0, 0.1, 0.5, trim);
  CHECK(b.commands[1] == Approx(0.45));
  CHECK(b.commands[2] == Approx(0.55));

  const auto c = allocate_valves(-5.0, 0.0, 0.5, trim);
  CHECK(c.commands[0] == 0.0);
  CHECK(c.saturated[0]);
  CHECK_FALSE(c.saturated[1]);

  // The observer input rows recover the virtual commands from the offsets.
  const auto d = allocate_valves(0.05, 0.08, 0.3, trim);
  double u1 = 0.0, u2 = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    u1 += kAllocationRowV1[i] * (d.raw[i] - trim[i]);
    u2 += kAllocationRowV2[i] * (d.raw[i] - trim[i]);
  }
  CHECK(u1 == Approx(0.05));
  CHECK(u2 == Approx(0.08));
}

TEST_CASE("PID") {
  PidGains g;
  g.kp = 0.02;
  g.ki = 0.0;
  g.kd = 0.0;

  SUBCASE("zero error returns trim") {
    const auto out = pid_step({}, 65.0, 65.0, g, 0.4, 0.01);
    CHECK(out.command == 0.4);
  }
  SUBCASE("proportional only") {
    const auto out = pid_step({}, 65.0, 60.0, g, 0.4, 0.01);
    CHECK(out.command == Approx(0.4 + 0.02 * 5.0));
  }
  SUBCASE("direction flips the error") {
    g.direction = -1.0;
    const auto out = pid_step({}, 65.0, 60.0, g, 0.4, 0.01);
    CHECK(out.command == Approx(0.4 - 0.02 * 5.0));
  }
  SUBCASE("integral freezes under saturation") {
    g.kp = 1.0;
    g.ki = 0.5;
    PidState a, b;
    for (int i = 0; i < 50; ++i) a = pid_step(a, 65.0, 60.0, g, 0.4, 0.01).state;
    for (int i = 0; i < 50; ++i) b = pid_step(b, 65.0, 55.0, g, 0.4, 0.01).state;
    CHECK(a.integral == 0.0);
    CHECK(b.integral == 0.0);
    const auto oa = pid_step(a, 65.0, 65.0, g, 0.4, 0.01);
    const auto ob = pid_step(b, 65.0, 65.0, g, 0.4, 0.01);
    CHECK(oa.command == ob.command);
  }
  SUBCASE("integral term is clamped") {
    g.kp = 0.0;
    g.ki = 0.01;
    g.integral_limit = 0.1;
    PidState s;
    for (int i = 0; i < 100000; ++i) s = pid_step(s, 65.0, 64.0, g, 0.5, 0.01).state;
    const auto out = pid_step(s, 65.0, 65.0, g, 0.5, 0.01);
    CHECK(out.command == Approx(0.6));
  }
  SUBCASE("derivative on measurement ignores setpoint steps") {
    g.kp = 0.0;
    g.kd = 1.0;
    auto s = pid_step({}, 65.0, 65.0, g, 0.4, 0.01).state;
    const auto out = pid_step(s, 75.0, 65.0, g, 0.4, 0.01);
    CHECK(out.command == 0.4);
  }
}

TEST_CASE("rate limit and saturation") {
  const ValveCommandSet prev{0.5, 0.0, 0.3};
  const auto a = saturate_and_rate_limit({0.501, 0.0, 0.3}, prev, 0.01, 0.4);
  CHECK(a[0] == 0.501);
  const auto b = saturate_and_rate_limit({0.5, 1.0, 0.3}, prev, 0.01, 0.4);
  CHECK(b[1] == Approx(0.004));
  const auto c = saturate_and_rate_limit({1.2, 0.0, 0.3}, {1.0, 0.0, 0.3}, 0.01, 0.4);
  CHECK(c[0] == 1.0);
  CHECK_THROWS_AS(saturate_and_rate_limit(prev, prev, 0.0, 0.4), altstand::DomainError);
}

TEST_CASE("ADRC law is affine") {
  const auto g = table_gains();
  auto eval = [&](double s) {
    const EsoState z1{64.0 + s, 0.1 * s, 0.3 - s}, z2{131.0 - s, -0.2 * s, 0.2 * s};
    const TdState r1{65.0 + 2 * s, 0.2}, r2{130.0, 0.05 * s};
    return adrc_command(z1, z2, r1, r2, {1.0 + s, -0.5 * s}, g);
  };
  const auto a = eval(0.0), b = eval(1.0), c = eval(2.5);
  CHECK(c.U1 - a.U1 == Approx(2.5 * (b.U1 - a.U1)).epsilon(1e-12));
  CHECK(c.U2 - a.U2 == Approx(2.5 * (b.U2 - a.U2)).epsilon(1e-12));
}

TEST_CASE("disturbance compensation recovers the nominal PD loop") {
  // y'' = b u + f with exact estimates and b_eff = b: the loop must follow
  // y'' = k1 (r - y) - k2 y'. With k1 = 2.25 and k2 = 3 it is critically
  // damped at 1.5 rad/s.
  AdrcGains g;
  g.k11 = 2.25;
  g.k12 = 3.0;
  g.k13 = 0.0;
  g.k21 = 2.25;
  g.k22 = 3.0;
  g.k23 = 0.0;
  g.b_eff1 = -4.0;
  g.b_eff2 = 4.0;
  const double b = g.b_eff1, dt = 1e-4;
  double y = 0.0, v = 0.0, t = 0.0, worst = 0.0;
  while (t < 10.0) {
    const double f = 3.0 * std::sin(t);
    const auto out = adrc_command({y, v, f}, {130.0, 0.0, 0.0}, {1.0, 0.0}, {130.0, 0.0}, {0.0, 0.0}, g);
    const double acc = b * out.U1 + f;
    y += dt * v + 0.5 * dt * dt * acc;
    v += dt * acc;
    t += dt;
    const double ref = 1.0 - std::exp(-1.5 * t) * (1.0 + 1.5 * t);
    worst = std::max(worst, std::abs(y - ref));
  }
  CHECK(worst < 0.01);
}

TEST_CASE("allocation conserves the V2 command") {
  const ValveCommandSet trim{0.4, 0.2, 0.3};
  for (double rho : {0.0, 0.25, 0.5, 1.0}) {
    for (double u2 : {-0.15, 0.0, 0.1}) {
      const auto a = allocate_valves(0.0, u2, rho, trim);
      CHECK(a.commands[1] + a.commands[2] - (trim[1] + trim[2]) == Approx(u2).epsilon(1e-14));
    }
  }
}

TEST_CASE("PID with zero gains passes trim through") {
  PidGains g;
  PidState s;
  for (int i = 0; i < 100; ++i) {
    const auto out = pid_step(s, 65.0, 65.0 + std::sin(0.1 * i), g, 0.37, 0.01);
    CHECK(out.command == 0.37);
    s = out.state;
  }
}
