#include <benchmark/benchmark.h>

#include "altstand/config.hpp"
#include "altstand/gas_plant.hpp"
#include "altstand/observer.hpp"
#include "altstand/penalty.hpp"
#include "altstand/simulation.hpp"

using namespace altstand;

static void BM_PlantStep(benchmark::State& state) {
  plant::PlantParams p;
  plant::BoundaryConditions bc;
  bc.mdot_out = 370.0;
  const plant::ChamberState c1{130e3, 253.0}, c2{65e3, 253.0};
  const auto trim = plant::solve_trim(c1, c2, bc, p).openings;
  auto s = plant::make_plant_state(c1, c2, trim, p, 0.01);
  for (auto _ : state) {
    s = plant::plant_step(s, trim, bc, p, 0.01);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_PlantStep);

static void BM_EsoStep(benchmark::State& state) {
  const auto cfg = observer::EsoConfig::from_bandwidth(5.0, {0.0, 57.9, 57.9});
  observer::EsoState z{65.0, 0.0, 0.0};
  double y = 65.0;
  for (auto _ : state) {
    z = observer::eso_step(z, y, {0.0, 0.01, 0.01}, cfg, 0.01);
    y += 1e-6;
    benchmark::DoNotOptimize(z);
  }
}
BENCHMARK(BM_EsoStep);

static void BM_CoordinatorTick(benchmark::State& state) {
  penalty::PenaltyProblem prob;
  auto st = penalty::CoordinatorState::start(prob.gamma);
  const penalty::CoordinatorSchedule sched;
  for (auto _ : state) {
    const auto out = penalty::coordinator_tick(65.5, 133.5, prob, st, sched);
    st = out.state;
    benchmark::DoNotOptimize(out.gradient);
  }
}
BENCHMARK(BM_CoordinatorTick);

static void BM_FullRun(benchmark::State& state) {
  auto cfg = harness::default_config();
  cfg.scenario = scenario::physical_scenario();
  cfg.controller = state.range(0) == 0 ? harness::ControllerKind::kAdrc : harness::ControllerKind::kPid;
  for (auto _ : state) {
    const auto r = harness::run_simulation(cfg);
    benchmark::DoNotOptimize(r.metrics);
  }
  state.SetLabel(state.range(0) == 0 ? "adrc" : "pid");
}
BENCHMARK(BM_FullRun)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
