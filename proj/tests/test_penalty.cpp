#include <algorithm>
#include <cmath>
#include <random>

#include "altstand/errors.hpp"
#include "altstand/penalty.hpp"
#include "doctest.h"

using namespace altstand::penalty;
using doctest::Approx;

namespace {

PenaltyProblem reference_problem() {
  PenaltyProblem p;
  p.center_on(65.0, 130.0);
  p.eps1 = 5.0;
  p.eps2 = 3.0;
  p.mu = 0.001;
  p.sigma = 0.01;
  p.gamma = 0.5;
  return p;
}

}  // namespace

TEST_CASE("objective") {
  const auto p = reference_problem();
  CHECK(objective(65, 130, p) == 0.0);
  CHECK(objective(66, 130, p) == 1.0);
  CHECK(objective(68, 126, p) == 25.0);
}

TEST_CASE("constraint values") {
  const auto p = reference_problem();
  CHECK(constraint_values(70, 130, p)[0] == 0.0);
  const auto a = constraint_values(66, 130, p);
  CHECK(a[0] == -24.0);
  CHECK(a[1] == -9.0);
  const auto b = constraint_values(65, 134, p);
  CHECK(b[0] == -25.0);
  CHECK(b[1] == 7.0);
}

TEST_CASE("penalty alpha") {
  auto p = reference_problem();
  CHECK(penalty_alpha(66, 131, p).value == 0.0);
  CHECK(penalty_alpha(65, 134, p).value == Approx(0.005257436348794319).epsilon(1e-12));
  CHECK(penalty_alpha(65, 134, p).value == Approx(5.2554e-3).epsilon(1e-3));
  // g1 = 7 needs |P1 - 65| = sqrt(32).
  const double p1 = 65.0 + std::sqrt(32.0);
  CHECK(penalty_alpha(p1, 130, p).value == Approx(4.934440479523527e-05).epsilon(1e-9));
  CHECK(penalty_alpha(p1, 130, p).value == Approx(4.9345e-5).epsilon(1e-4));

  p.sigma = 1000.0;
  const auto sat = penalty_alpha(65, 134, p);
  CHECK(sat.saturated);
  CHECK(std::isfinite(sat.value));
  p.gamma = 1e8;
  const auto gs = grad_L(65, 134, p);
  CHECK(std::isfinite(gs[1]));
}

TEST_CASE("augmented objective") {
  auto p = reference_problem();
  CHECK(augmented_objective(66, 130, p).value == objective(66, 130, p));
  // f = 16, alpha = (e^0.07 - 1)^2 at (65, 134).
  CHECK(augmented_objective(65, 134, p).value == Approx(16.002628718174396).epsilon(1e-12));
  CHECK(augmented_objective(65, 134, p).value == Approx(16.0026277).epsilon(1e-7));
  p.gamma = 0.0;
  CHECK_THROWS_AS(augmented_objective(65, 134, p), altstand::ConfigError);
}

TEST_CASE("gradient") {
  const auto p = reference_problem();
  const auto g0 = grad_L(65, 130, p);
  CHECK(g0[0] == 0.0);
  CHECK(g0[1] == 0.0);
  const auto g = grad_L(66, 130, p);
  CHECK(g[0] == 2.0);
  CHECK(g[1] == 0.0);
  const auto gi = grad_L(65, 134, p);
  CHECK(gi[1] > 2.0 * (134 - 130));
  const double h = 1e-6;
  const double fd = (augmented_objective(65, 134 + h, p).value -
                     augmented_objective(65, 134 - h, p).value) / (2 * h);
  CHECK(gi[1] == Approx(fd).epsilon(1e-7));
}

TEST_CASE("offline solve with a feasible optimum") {
  auto p = reference_problem();
  p.lr = 0.2;
  const auto tr = solve_offline(p, {60.0, 140.0});
  CHECK(tr.status == SolveStatus::kConverged);
  CHECK(tr.final().p1 == Approx(65.0).epsilon(1e-5));
  CHECK(tr.final().p2 == Approx(130.0).epsilon(1e-5));
  CHECK(std::abs(tr.final().p1 - 65.0) < 1e-3);
}

TEST_CASE("offline solve projects onto the constraint") {
  PenaltyProblem p;
  p.p1_set = 65.0;
  p.p2_set = 130.0;
  p.c1 = 70.0;
  p.c2 = 130.0;
  p.eps1 = 2.0;
  p.eps2 = 3.0;
  p.gamma = 1.0;
  p.mu = 1.0;
  p.sigma = 1.0;
  p.lr = 0.005;
  p.omega = 10.0;
  p.xi = 1e-6;
  p.gamma_max = 1e6;
  const auto tr = solve_offline(p, {69.0, 130.0});
  CHECK(tr.status != SolveStatus::kMaxIters);
  CHECK(tr.final().p1 == Approx(68.0).epsilon(1e-2 / 68.0));
  CHECK(std::abs(tr.final().p1 - 68.0) < 1e-2);
  CHECK(tr.final().p2 == Approx(130.0));
}

TEST_CASE("offline solve from the optimum") {
  const auto p = reference_problem();
  const auto tr = solve_offline(p, {65.0, 130.0});
  CHECK(tr.status == SolveStatus::kConverged);
  CHECK(tr.iterates.size() <= 3);  // start row plus at most two steps
}

TEST_CASE("coordinator") {
  auto p = reference_problem();
  p.omega = 2.0;
  const CoordinatorSchedule sched{50, 200, 1e4};

  SUBCASE("at setpoints") {
    const auto out = coordinator_tick(65, 130, p, CoordinatorState::start(0.5), sched);
    CHECK(out.gradient[0] == 0.0);
    CHECK(out.gradient[1] == 0.0);
  }
  SUBCASE("feasible estimates keep gamma") {
    auto st = CoordinatorState::start(0.5);
    for (int i = 0; i < 300; ++i) {
      const auto out = coordinator_tick(66, 131, p, st, sched);
      CHECK(out.gradient[0] == 2.0);
      CHECK(out.gradient[1] == 2.0);
      st = out.state;
    }
    CHECK(st.gamma == 0.5);
  }
  SUBCASE("sustained violation grows gamma by omega per window") {
    auto st = CoordinatorState::start(0.5);
    for (std::size_t i = 0; i < 2 * sched.n_grow; ++i) st = coordinator_tick(65, 134, p, st, sched).state;
    CHECK(st.gamma == Approx(0.5 * 2.0 * 2.0));
  }
  SUBCASE("reset after the feasible window") {
    auto st = CoordinatorState::start(0.5);
    for (std::size_t i = 0; i < 3 * sched.n_grow; ++i) st = coordinator_tick(65, 134, p, st, sched).state;
    CHECK(st.gamma > 0.5);
    for (std::size_t i = 0; i < sched.m_reset; ++i) st = coordinator_tick(65, 130, p, st, sched).state;
    CHECK(st.gamma == 0.5);
  }
  SUBCASE("gamma is capped") {
    auto st = CoordinatorState::start(0.5);
    for (int i = 0; i < 5000; ++i) st = coordinator_tick(65, 134, p, st, sched).state;
    CHECK(st.gamma == sched.gamma_max);
  }
}

TEST_CASE("gradient matches central differences") {
  auto p = reference_problem();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> d1(50.0, 80.0), d2(120.0, 140.0), gam(0.1, 10.0);
  const double h = 1e-5;
  for (int i = 0; i < 1000; ++i) {
    p.gamma = gam(rng);
    const double x = d1(rng), y = d2(rng);
    const auto g = grad_L(x, y, p);
    const double fx = (augmented_objective(x + h, y, p).value - augmented_objective(x - h, y, p).value) / (2 * h);
    const double fy = (augmented_objective(x, y + h, p).value - augmented_objective(x, y - h, p).value) / (2 * h);
    CHECK(std::abs(g[0] - fx) / std::max(1.0, std::abs(g[0])) < 1e-6);
    CHECK(std::abs(g[1] - fy) / std::max(1.0, std::abs(g[1])) < 1e-6);
  }
}

TEST_CASE("exact on the feasible set") {
  const auto p = reference_problem();
  for (double x : {61.0, 64.5, 69.0}) {
    for (double y : {128.0, 131.5}) {
      CHECK(augmented_objective(x, y, p).value == objective(x, y, p));
      const auto g = grad_L(x, y, p);
      CHECK(g[0] == 2 * (x - 65.0));
      CHECK(g[1] == 2 * (y - 130.0));
    }
  }
}

namespace {

PenaltyProblem toy_problem() {
  PenaltyProblem p;
  p.p1_set = 65.0;
  p.p2_set = 130.0;
  p.c1 = 70.0;
  p.c2 = 130.0;
  p.eps1 = 2.0;
  p.eps2 = 3.0;
  p.gamma = 1.0;
  p.mu = 1.0;
  p.sigma = 1.0;
  p.lr = 0.005;
  p.omega = 10.0;
  p.xi = 1e-6;
  p.gamma_max = 1e6;
  return p;
}

}  // namespace

TEST_CASE("descent at fixed gamma") {
  const auto p = toy_problem();
  const auto tr = solve_offline(p, {69.5, 131.0});
  REQUIRE(tr.iterates.size() > 2);
  for (std::size_t i = 1; i < tr.iterates.size(); ++i) {
    if (tr.iterates[i].gamma != tr.iterates[i - 1].gamma) continue;
    CHECK(tr.iterates[i].L <= tr.iterates[i - 1].L + 1e-12);
  }
}

TEST_CASE("penalty limit") {
  auto p = toy_problem();
  p.gamma_max = 1e8;
  p.xi = 1e-12;
  const auto tr = solve_offline(p, {69.0, 130.0});
  CHECK(tr.status != SolveStatus::kMaxIters);
  const auto& x = tr.final();
  CHECK(x.gamma * x.alpha < 1e-6);
  CHECK(std::abs(x.L - x.f) < 1e-6);
  const auto g = constraint_values(x.p1, x.p2, p);
  CHECK(std::abs(x.p1 - 70.0) <= 2.0 + 1e-4);
  CHECK(g[1] <= 0.0);
}

TEST_CASE("runaway iterates are reported") {
  // Far outside the feasible band the exponential penalty is too steep for
  // the configured step.
  CHECK_THROWS_AS(solve_offline(toy_problem(), {62.0, 133.0}), SolverDivergence);
}
