// Benchmarks comparing the OpenMP kernels against their serial reference
// implementations. Build with -DCMAKE_BUILD_TYPE=Release and run:
//   ./build/bench/pose_bench

#include <benchmark/benchmark.h>

#include "pose/distance_transform.hpp"
#include "pose/features.hpp"
#include "pose/inference.hpp"
#include "pose/reference.hpp"
#include "pose/rng.hpp"

#include "../tests/support.hpp"

using namespace pose;

namespace {

FeatureMap bench_map(int side) {
    Rng rng(1);
    return test_support::random_feature_map(rng, side, side, kHogDim);
}

std::vector<double> bench_filter(BoxSize box) {
    Rng rng(2);
    std::vector<double> f(static_cast<size_t>(box.w) * box.h * kHogDim);
    for (auto& v : f) v = rng.uniform(-1, 1);
    return f;
}

void BM_correlate_omp(benchmark::State& state) {
    const FeatureMap fm = bench_map(static_cast<int>(state.range(0)));
    const BoxSize box{6, 9};
    const auto filter = bench_filter(box);
    for (auto _ : state) {
        const Grid g = correlate_filter(fm, filter, box);
        benchmark::DoNotOptimize(g.v.data());
    }
}

void BM_correlate_reference(benchmark::State& state) {
    const FeatureMap fm = bench_map(static_cast<int>(state.range(0)));
    const BoxSize box{6, 9};
    const auto filter = bench_filter(box);
    for (auto _ : state) {
        const Grid g = ref::correlate_reference(fm, filter, box);
        benchmark::DoNotOptimize(g.v.data());
    }
}

Grid bench_grid(int side) {
    Rng rng(3);
    Grid g(side, side);
    for (auto& v : g.v) v = rng.uniform(-10, 10);
    return g;
}

void BM_dt2d_envelope(benchmark::State& state) {
    const Grid g = bench_grid(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        const Dt2dResult r = distance_transform_2d(g, {0.4, -0.2, -0.9, -1.4}, {1.3, -0.8});
        benchmark::DoNotOptimize(r.scores.v.data());
    }
}

void BM_dt2d_reference(benchmark::State& state) {
    const Grid g = bench_grid(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        const Dt2dResult r = ref::dt2d_reference(g, {0.4, -0.2, -0.9, -1.4}, {1.3, -0.8});
        benchmark::DoNotOptimize(r.scores.v.data());
    }
}

void BM_parse_toy_model(benchmark::State& state) {
    Rng rng(4);
    const SkeletonTree tree = test_support::random_toy_tree(rng, 4, {3, 3});
    const ModelParams params = test_support::random_toy_params(rng, tree, 3, 8, 0.8);
    const FeatureMap fm =
        test_support::random_feature_map(rng, static_cast<int>(state.range(0)),
                                         static_cast<int>(state.range(0)), 8);
    for (auto _ : state) {
        const ParseResult r = parse(fm, params, tree);
        benchmark::DoNotOptimize(r.total_score);
    }
}

} // namespace

BENCHMARK(BM_correlate_omp)->Arg(24)->Arg(48)->Arg(96);
BENCHMARK(BM_correlate_reference)->Arg(24)->Arg(48)->Arg(96);
BENCHMARK(BM_dt2d_envelope)->Arg(32)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_dt2d_reference)->Arg(8)->Arg(16)->Arg(32);
BENCHMARK(BM_parse_toy_model)->Arg(32)->Arg(64);

BENCHMARK_MAIN();
