#include <benchmark/benchmark.h>

#include "fwav/controller.hpp"
#include "fwav/flatness.hpp"
#include "fwav/planner.hpp"
#include "fwav/simulation.hpp"

using namespace fwav;

namespace {

planner::PlanResult plan_case(const std::string& name, int restarts) {
  sim::Scenario s = sim::scenario_for_case(name);
  s.plan.options.restarts = restarts;
  return planner::plan(s.plan.constraints, s.plan.weights, s.plan.options);
}

void BM_PlanCaseA(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(plan_case("a", static_cast<int>(state.range(0))).traj.duration());
  }
}
BENCHMARK(BM_PlanCaseA)->Arg(1)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_FlatToAttitude(benchmark::State& state) {
  const planner::PlanResult r = plan_case("b", 4);
  const VerticalParams p;
  const double T = r.traj.duration();
  double t = 0.0;
  for (auto _ : state) {
    const flatness::AttitudeThrust a = flatness::flat_to_attitude_and_thrust(r.traj.flat_sample(t), p);
    benchmark::DoNotOptimize(a.f_flap);
    t += 1e-3;
    if (t > T) t = 0.0;
  }
}
BENCHMARK(BM_FlatToAttitude);

void BM_ControllerStep(benchmark::State& state) {
  const planner::PlanResult r = plan_case("a", 4);
  const VerticalParams p;
  control::TrackingController ctl(control::ControllerGains{}, p, control::ControllerOptions{});
  ctl.reset(sim::initial_heading(r.traj), 1);
  const double T = r.traj.duration(), dt = 1e-3;
  double t = 0.0;
  for (auto _ : state) {
    control::Reference ref;
    ref.sigma = r.traj.eval(t, 0);
    ref.sigma_dot = r.traj.eval(t, 1);
    ref.sigma_ddot = r.traj.eval(t, 2);
    control::Measurement m;
    m.p = ref.sigma + Vec3(0.05, -0.05, 0.02);
    m.v = ref.sigma_dot;
    benchmark::DoNotOptimize(ctl.update(t, ref, m, dt).f_flap);
    t += dt;
    if (t > T) {
      t = 0.0;
      ctl.reset(sim::initial_heading(r.traj), 1);
    }
  }
}
BENCHMARK(BM_ControllerStep);

void BM_ClosedLoopCaseA(benchmark::State& state) {
  const sim::Scenario s = sim::scenario_for_case("a");
  const planner::PlanResult r = plan_case("a", 4);
  for (auto _ : state) benchmark::DoNotOptimize(sim::run_closed_loop(s, r.traj).states.size());
}
BENCHMARK(BM_ClosedLoopCaseA)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
