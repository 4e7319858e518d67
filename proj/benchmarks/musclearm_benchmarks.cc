// Copyright 2026 The musclearm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "musclearm/arm.h"
#include "musclearm/harness.h"
#include "musclearm/muscle.h"
#include "musclearm/presets.h"

namespace {

using namespace musclearm;

void BM_StepMuscle(benchmark::State& state) {
  const MuscleParams p;
  const double l_mtu = 0.145;
  MuscleState s = isometric_state(p, 0.5, l_mtu);
  double u = 0.2;
  for (auto _ : state) {
    s = step_muscle(p, s, u, l_mtu, 1e-3).state;
    u = 1.0 - u;
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_StepMuscle);

void BM_InverseForceVelocity(benchmark::State& state) {
  double target = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(inverse_force_velocity(target));
    target = target > 1.5 ? 0.1 : target + 0.01;
  }
}
BENCHMARK(BM_InverseForceVelocity);

void BM_IntegrateStep(benchmark::State& state) {
  const ArmPreset p = make_preset(state.range(0) == 0 ? kPlanar2x4 : kSpatialLtdm);
  const int n_m = p.model.n_muscles();
  ArmState s = rest_state(p.model, p.model.q_ref, Eigen::VectorXd::Constant(n_m, 0.5));
  const Eigen::VectorXd u = Eigen::VectorXd::Constant(n_m, 0.5);
  const Eigen::VectorXd f = Eigen::VectorXd::Zero(p.model.task_dims);
  for (auto _ : state) {
    s = integrate_step(p.model, s, u, f, 1e-3).state;
    benchmark::DoNotOptimize(s);
  }
  state.SetLabel(p.model.name);
}
BENCHMARK(BM_IntegrateStep)->Arg(0)->Arg(1);

void BM_HoldTrial(benchmark::State& state) {
  TrajectorySpec spec;
  spec.duration = 1.0;
  spec.amplitude = 0.05;
  const Benchmark bench = make_benchmark(make_preset(kPlanar2x4), spec, 1e-3);
  for (auto _ : state) {
    ConstantController hold(bench.u_bias);
    benchmark::DoNotOptimize(run_trial(bench, hold, {}, 0));
  }
  state.SetItemsProcessed(state.iterations() * bench.horizon());
}
BENCHMARK(BM_HoldTrial)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
