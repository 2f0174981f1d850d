/******************************************************************************
 * Copyright 2026 The sigdisc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * 	http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 * @file bench_kernels.cpp Serial reference vs OpenMP kernels.
 *
 *****************************************************************************/

#include "sigdisc/kernels.hpp"
#include "sigdisc/standardize.hpp"
#include "sigdisc/synth.hpp"

#include <benchmark/benchmark.h>

using namespace sigdisc;

namespace {

const Eigen::MatrixXd& data(Eigen::Index p, Eigen::Index n)
{
    static Eigen::MatrixXd x;
    if (x.rows() != p || x.cols() != n) {
        MixtureOptions o;
        o.channels = static_cast<int>(p);
        o.seed = 3;
        x = generate_mixture_matrix(static_cast<int>(p), n, SourceFamily::Laplace, o).x;
    }
    return x;
}

template <bool Parallel>
void BM_covariance(benchmark::State& state)
{
    const auto& x = data(state.range(0), state.range(1));
    const Eigen::VectorXd mean = x.rowwise().mean();
    for (auto _ : state) {
        auto c = Parallel ? kernels::covariance(x, mean) : kernels::serial::covariance(x, mean);
        benchmark::DoNotOptimize(c.data());
    }
}

template <bool Parallel>
void BM_fastica_step(benchmark::State& state)
{
    const auto& y = data(state.range(0), state.range(1));
    const Eigen::MatrixXd w = Eigen::MatrixXd::Identity(y.rows(), y.rows());
    for (auto _ : state) {
        auto r = Parallel ? kernels::fastica_step(w, y, Contrast::LogCosh, 1.0)
                          : kernels::serial::fastica_step(w, y, Contrast::LogCosh, 1.0);
        benchmark::DoNotOptimize(r.data());
    }
}

template <bool Parallel>
void BM_sample_records(benchmark::State& state)
{
    SynthConfig cfg;
    cfg.records = static_cast<int>(state.range(0));
    cfg.seed = 11;
    static const SynthDataset ds = generate_dataset(cfg);
    CurveParams params;
    params.rash_histograms = 16;
    SamplingPlan plan;
    plan.seed = 5;
    for (auto _ : state) {
        auto s = Parallel ? kernels::sample_records(ds.records, ds.truth.dictionary, params, plan)
                          : kernels::serial::sample_records(ds.records, ds.truth.dictionary,
                                                            params, plan);
        benchmark::DoNotOptimize(s.data());
    }
}

}  // namespace

BENCHMARK(BM_covariance<false>)->Args({60, 20000});
BENCHMARK(BM_covariance<true>)->Args({60, 20000});
BENCHMARK(BM_fastica_step<false>)->Args({8, 20000})->Args({40, 50000});
BENCHMARK(BM_fastica_step<true>)->Args({8, 20000})->Args({40, 50000});
BENCHMARK(BM_sample_records<false>)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sample_records<true>)->Arg(100)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
