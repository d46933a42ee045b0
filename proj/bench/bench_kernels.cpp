/*
 *   Copyright 2026 The beamlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "beamlab/harness.hpp"
#include "beamlab/tracker.hpp"

#include <benchmark/benchmark.h>

using namespace beamlab;

namespace
{

ExperimentConfig sweep_config(bool parallel)
{
    ExperimentConfig cfg;
    cfg.parallel = parallel;
    cfg.horizon = 100;
    return cfg;
}

void BM_EstimationTrials(benchmark::State& state)
{
    const ExperimentConfig cfg = sweep_config(state.range(0) != 0);
    const double snr[] = {0.0};
    for (auto _ : state)
        benchmark::DoNotOptimize(run_estimation_trials(cfg, snr, 200, kAllPolicies, "bench"));
    state.SetLabel(cfg.parallel ? "openmp" : "serial");
}
BENCHMARK(BM_EstimationTrials)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_TrackingCurve(benchmark::State& state)
{
    const ExperimentConfig cfg = sweep_config(state.range(0) != 0);
    for (auto _ : state)
        benchmark::DoNotOptimize(run_tracking_curve(cfg, TrackModel::position, 64, 0.0, 0.0, 200, "bench"));
    state.SetLabel(cfg.parallel ? "openmp" : "serial");
}
BENCHMARK(BM_TrackingCurve)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

struct KernelInputs
{
    MotionModel model;
    TrackLink link;
    Vector4 x{4.0, 16.667, 0.8, 0.3};
    AnglePair pointing;

    explicit KernelInputs(int n)
        : link{{n, 0.5}, {n, 0.5}, 1.0, {1.0, 0.0}}
    {
        model.height = 4.0;
        pointing = angles_from_position(4.05, model.height);
    }
};

void BM_Observation(benchmark::State& state)
{
    const KernelInputs in(static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(observation_fn(in.x, in.model, in.pointing, in.link));
}
BENCHMARK(BM_Observation)->Arg(16)->Arg(64)->Arg(128);

void BM_ObservationDoubleSum(benchmark::State& state)
{
    const KernelInputs in(static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(observation_fn_double_sum(in.x, in.model, in.pointing, in.link));
}
BENCHMARK(BM_ObservationDoubleSum)->Arg(16)->Arg(64)->Arg(128);

void BM_Jacobian(benchmark::State& state)
{
    const KernelInputs in(static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(jacobian(in.x, in.model, in.pointing, in.link));
}
BENCHMARK(BM_Jacobian)->Arg(16)->Arg(64)->Arg(128);

void BM_JacobianDoubleSum(benchmark::State& state)
{
    const KernelInputs in(static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(jacobian_double_sum(in.x, in.model, in.pointing, in.link));
}
BENCHMARK(BM_JacobianDoubleSum)->Arg(16)->Arg(64)->Arg(128);

} // namespace

BENCHMARK_MAIN();
