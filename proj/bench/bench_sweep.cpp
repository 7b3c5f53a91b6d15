#include <benchmark/benchmark.h>

#include <random>

#include "bmdp/kernels.hpp"
#include "bmdp/reach.hpp"
#include "../tests/support/random_models.hpp"

using namespace bmdp;

namespace {

struct Fixture {
    Bmdp model;
    std::vector<char> frozen;
    std::vector<double> in;
    std::vector<double> out;

    explicit Fixture(std::size_t n) {
        std::mt19937_64 rng(n);
        model = testing_support::random_wide_bmdp(rng, n, 3, 8);
        frozen.assign(n, 0);
        in.resize(n);
        out.resize(n);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (auto& x : in) x = unit(rng);
    }

    SweepProblem problem() const { return {&model.skeleton(), model.rows(), frozen, Sense::Max, Sense::Min}; }
};

template <bool Parallel>
void BM_Sweep(benchmark::State& state) {
    Fixture f(static_cast<std::size_t>(state.range(0)));
    auto problem = f.problem();
    for (auto _ : state) {
        double d = Parallel ? sweep_parallel(problem, f.in, f.out) : sweep_serial(problem, f.in, f.out);
        benchmark::DoNotOptimize(d);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
    state.counters["threads"] = Parallel ? sweep_threads() : 1;
}

template <bool Parallel>
void BM_RobustReach(benchmark::State& state) {
    Fixture f(static_cast<std::size_t>(state.range(0)));
    auto target = state_mask(f.model.numStates(), std::vector<StateId>{0, 1, 2});
    RobustReachOptions options{.parallel = Parallel};
    for (auto _ : state) {
        auto r = robust_reach(f.model.skeleton(), f.model.rows(), target, Sense::Max, Sense::Min, options);
        benchmark::DoNotOptimize(r.values.data());
    }
}

}  // namespace

BENCHMARK(BM_Sweep<false>)->Name("sweep/serial")->RangeMultiplier(4)->Range(1 << 10, 1 << 18)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Sweep<true>)->Name("sweep/parallel")->RangeMultiplier(4)->Range(1 << 10, 1 << 18)->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_RobustReach<false>)->Name("robust_reach/serial")->Arg(1 << 14)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RobustReach<true>)->Name("robust_reach/parallel")->Arg(1 << 14)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
