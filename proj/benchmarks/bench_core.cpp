#include "skdv/diffusion.hpp"
#include "skdv/integrator.hpp"
#include "skdv/limit.hpp"
#include "skdv/modulation.hpp"
#include "skdv/noise.hpp"
#include "skdv/soliton.hpp"

#include <benchmark/benchmark.h>

using namespace skdv;

namespace {

void BM_SolverStep(benchmark::State& state) {
    Grid g(100.0, static_cast<std::size_t>(state.range(0)));
    SkdvSolver solver(g);
    SkdvState s = make_state(soliton(1.0, g), 0.05, 1.0, NoiseState(Kernel::gaussian(1.0, 2.0), g, 1, 0));
    for (auto _ : state) {
        solver.step(s, 1e-3);
        benchmark::DoNotOptimize(s.u.data());
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SolverStep)->Arg(256)->Arg(512)->Arg(1024)->Arg(2048);

void BM_NoiseIncrement(benchmark::State& state) {
    Grid g(100.0, static_cast<std::size_t>(state.range(0)));
    NoiseState ns(Kernel::gaussian(1.0, 2.0), g, 1, 0);
    Field w(g);
    for (auto _ : state) {
        ns.sample_increment(1e-3, 0.3, 1, w.data());
        benchmark::DoNotOptimize(w.data());
    }
}
BENCHMARK(BM_NoiseIncrement)->Arg(512)->Arg(2048);

void BM_Decompose(benchmark::State& state) {
    Grid g(100.0, 512);
    ModulationOptions o;
    o.eps = 0.05;
    ModulationTracker tr(g, Kernel::gaussian(1.0, 2.0), o);
    Field u = soliton_at({1.05, 2.0}, g) + 0.02 * soliton_dxx(1.0, g);
    for (auto _ : state) {
        auto s = tr.decompose(u, {1.0, 1.9});
        benchmark::DoNotOptimize(s.c);
    }
}
BENCHMARK(BM_Decompose);

void BM_Coefficients(benchmark::State& state) {
    Grid g(100.0, 512);
    ModulationOptions o;
    o.eps = 0.05;
    ModulationTracker tr(g, Kernel::gaussian(1.0, 2.0), o);
    auto s = tr.decompose(soliton_at({1.05, 2.0}, g), {1.0, 1.9});
    for (auto _ : state) {
        auto co = tr.coefficients(s);
        benchmark::DoNotOptimize(co.y);
    }
}
BENCHMARK(BM_Coefficients);

void BM_LimitStep(benchmark::State& state) {
    Grid g(100.0, 512);
    LimitSystem sys(g, 1.0);
    LimitState s = make_limit_state(NoiseState(Kernel::gaussian(1.0, 2.0), g, 1, 0));
    for (auto _ : state) {
        sys.step(s, 1e-3);
        benchmark::DoNotOptimize(s.lambda);
    }
}
BENCHMARK(BM_LimitStep);

void BM_PeakQuadrature(benchmark::State& state) {
    Grid g(100.0, 1024);
    SigmaModel m = sigma_model(Kernel::gaussian(1.0, 2.0), 1.0, g, build_dual_basis(1.0, g));
    const double t = static_cast<double>(state.range(0));
    for (auto _ : state) {
        auto p = peak_expectation(m, 0.01, t);
        benchmark::DoNotOptimize(p.value);
    }
}
BENCHMARK(BM_PeakQuadrature)->Arg(100)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

// libbenchmark_main.a ships as LTO bytecode from another gcc, so main lives here
BENCHMARK_MAIN();
