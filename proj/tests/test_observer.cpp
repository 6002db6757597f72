#include <algorithm>
#include <cmath>

#include "altstand/errors.hpp"
#include "altstand/observer.hpp"
#include "doctest.h"

using namespace altstand::observer;
using doctest::Approx;

TEST_CASE("ESO gains from bandwidth") {
  using A = std::array<double, 3>;
  CHECK(eso_gains_from_bandwidth(1.0) == A{3, 3, 1});
  CHECK(eso_gains_from_bandwidth(2.0) == A{6, 12, 8});
  CHECK(eso_gains_from_bandwidth(5.0) == A{15, 75, 125});
  CHECK_THROWS_AS(eso_gains_from_bandwidth(0.0), altstand::DomainError);
}

TEST_CASE("ESO equilibrium") {
  const auto cfg = EsoConfig::from_bandwidth(5.0, {1.0, 0.0, 0.0});
  const EsoState s{42.0, 0.0, 0.0};
  const auto n = eso_step(s, 42.0, {0.0, 0.0, 0.0}, cfg, 0.01);
  CHECK(n.z1 == 42.0);
  CHECK(n.z2 == 0.0);
  CHECK(n.z3 == 0.0);
}

TEST_CASE("ESO disturbance estimate against a double integrator") {
  // The z3 estimation error follows exp(-w t) (1 + w t + (w t)^2 / 2) for
  // a constant disturbance and zero initial state.
  const double w = 5.0, d = 3.0, dt = 1e-4;
  const auto cfg = EsoConfig::from_bandwidth(w, {0.0, 0.0, 0.0});
  EsoState z;
  double y = 0.0, ydot = 0.0, t = 0.0;
  auto analytic = [&](double tt) {
    const double x = w * tt;
    return std::exp(-x) * (1.0 + x + 0.5 * x * x);
  };
  auto advance_to = [&](double t_end) {
    while (t < t_end - 0.5 * dt) {
      z = eso_step(z, y, {0.0, 0.0, 0.0}, cfg, dt);
      y += dt * ydot + 0.5 * dt * dt * d;
      ydot += dt * d;
      t += dt;
    }
  };
  advance_to(5.0 / w);
  CHECK(std::abs(d - z.z3) / d == Approx(analytic(5.0 / w)).epsilon(0.01));
  advance_to(9.0 / w);
  CHECK(std::abs(d - z.z3) / d < 0.02);
}

TEST_CASE("ESO on a ramp") {
  const double a = 0.2, dt = 0.001;
  auto lag_at = [&](double w, double t_probe, EsoState& out) {
    const auto cfg = EsoConfig::from_bandwidth(w, {0.0, 0.0, 0.0});
    EsoState z;
    double lag = 0.0;
    const int n = static_cast<int>(std::lround(30.0 / dt));
    for (int k = 0; k < n; ++k) {
      const double t = k * dt;
      z = eso_step(z, a * t, {0.0, 0.0, 0.0}, cfg, dt);
      if (std::abs((k + 1) * dt - t_probe) < 0.5 * dt) lag = std::abs(a * (k + 1) * dt - z.z1);
    }
    out = z;
    return lag;
  };
  EsoState z2, z8;
  const double lag2 = lag_at(2.0, 2.0, z2);
  const double lag8 = lag_at(8.0, 2.0, z8);
  CHECK(z2.z2 == Approx(a).epsilon(1e-6));
  CHECK(z8.z2 == Approx(a).epsilon(1e-6));
  CHECK(std::abs(z2.z1 - a * 30.0) < 1e-6);
  CHECK(std::abs(z8.z1 - a * 30.0) < 1e-6);
  CHECK(lag8 < lag2);
}

TEST_CASE("ESO step rejects a coarse step") {
  const auto cfg = EsoConfig::from_bandwidth(50.0, {0.0, 0.0, 0.0});
  CHECK_THROWS(eso_step({}, 0.0, {0.0, 0.0, 0.0}, cfg, 0.01));
}

TEST_CASE("fhan is bounded by r") {
  for (double x1 : {-100.0, -1.0, 0.0, 0.3, 50.0}) {
    for (double x2 : {-20.0, 0.0, 4.0}) {
      CHECK(std::abs(fhan(x1, x2, 10.0, 0.02)) <= 10.0 + 1e-12);
    }
  }
  CHECK(fhan(0.0, 0.0, 10.0, 0.02) == 0.0);
}

TEST_CASE("tracking differentiator") {
  const double dt = 0.01;
  SUBCASE("constant setpoint at rest") {
    auto s = TdState::at_rest(65.0, 10.0, 2 * dt);
    for (int i = 0; i < 100; ++i) s = td_step(s, 65.0, dt);
    CHECK(s.v1 == 65.0);
    CHECK(s.v2 == 0.0);
  }
  SUBCASE("ramp slope") {
    auto s = TdState::at_rest(65.0, 10.0, 2 * dt);
    double t = 0.0;
    for (int k = 0; k < 2000; ++k) {
      t = k * dt;
      const double sp = 65.0 + 0.2 * std::clamp(t, 0.0, 25.0);
      s = td_step(s, sp, dt);
    }
    CHECK(s.v2 == Approx(0.2).epsilon(0.01));
    CHECK(std::abs(s.v2 - 0.2) <= 0.002);
  }
  SUBCASE("step without overshoot") {
    auto s = TdState::at_rest(0.0, 10.0, 2 * dt);
    double peak = 0.0;
    for (int k = 0; k < 3000; ++k) {
      s = td_step(s, 1.0, dt);
      peak = std::max(peak, s.v1);
    }
    CHECK(peak - 1.0 <= 1e-9);
    CHECK(s.v1 == Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("ESO gains satisfy the bandwidth identity") {
  for (double w : {0.1, 0.7, 2.0, 13.0, 100.0}) {
    const auto b = eso_gains_from_bandwidth(w);
    CHECK(b[0] == Approx(3 * w));
    CHECK(b[1] == Approx(3 * w * w));
    CHECK(b[2] == Approx(w * w * w));
    CHECK(EsoConfig::from_bandwidth(w, {}).beta == b);
  }
}

TEST_CASE("ESO step is linear") {
  const auto cfg = EsoConfig::from_bandwidth(5.0, {-58.0, 57.9, 57.9});
  const EsoState a{1.0, -2.0, 0.5}, b{-0.3, 4.0, 2.0};
  const std::array<double, 3> ua{0.1, 0.2, -0.1}, ub{-0.05, 0.0, 0.3};
  const double ya = 1.5, yb = -2.5, k = 1.7, dt = 0.01;
  const auto sa = eso_step(a, ya, ua, cfg, dt);
  const auto sb = eso_step(b, yb, ub, cfg, dt);
  const EsoState c{a.z1 + k * b.z1, a.z2 + k * b.z2, a.z3 + k * b.z3};
  std::array<double, 3> uc{};
  for (std::size_t i = 0; i < 3; ++i) uc[i] = ua[i] + k * ub[i];
  const auto sc = eso_step(c, ya + k * yb, uc, cfg, dt);
  CHECK(sc.z1 == Approx(sa.z1 + k * sb.z1).epsilon(1e-14));
  CHECK(sc.z2 == Approx(sa.z2 + k * sb.z2).epsilon(1e-14));
  CHECK(sc.z3 == Approx(sa.z3 + k * sb.z3).epsilon(1e-14));
}

TEST_CASE("ESO disturbance error scales as 1/omega") {
  // Ramp disturbance f = s t on a double integrator: the steady z3 error is
  // 3 s / omega.
  const double slope = 1.0, dt = 1e-4;
  auto steady_error = [&](double w) {
    const auto cfg = EsoConfig::from_bandwidth(w, {0.0, 0.0, 0.0});
    EsoState z;
    double y = 0.0, v = 0.0, t = 0.0;
    for (int k = 0; k < 200000; ++k) {
      z = eso_step(z, y, {0.0, 0.0, 0.0}, cfg, dt);
      const double f = slope * t;
      y += dt * v + 0.5 * dt * dt * f;
      v += dt * f;
      t += dt;
    }
    return std::abs(slope * t - z.z3);
  };
  const double ratio = steady_error(10.0) / steady_error(20.0);
  CHECK(ratio >= 1.6);
  CHECK(ratio <= 2.4);
}
