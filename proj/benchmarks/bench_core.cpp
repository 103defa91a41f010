#include <benchmark/benchmark.h>

#include "blowup/analytic.hpp"
#include "blowup/expr.hpp"
#include "blowup/improper.hpp"
#include "blowup/osgood.hpp"
#include "blowup/pde.hpp"
#include "blowup/stochastic.hpp"

using namespace blowup;

static void BM_ExprEval(benchmark::State& state) {
    const auto f = FunctionExpr::parse("8*x^2 - 36*x + 48 + exp(-x)*sin(3*x)");
    double x = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(f(x));
        x += 1e-6;
    }
}
BENCHMARK(BM_ExprEval);

static void BM_ClassifyImproper(benchmark::State& state) {
    const auto f = FunctionExpr::parse("1/(8*x^2 - 36*x + 48)");
    for (auto _ : state) benchmark::DoNotOptimize(classify_improper(f, 2.25).value);
}
BENCHMARK(BM_ClassifyImproper)->Unit(benchmark::kMicrosecond);

static void BM_TwoBarrierSeries(benchmark::State& state) {
    const BarrierPair bp(ExtReal(-1.0), ExtReal(1.0));
    double h = 0.05;
    for (auto _ : state) {
        benchmark::DoNotOptimize(two_barrier_cdf(bp, h).value);
        h = h > 4.0 ? 0.05 : h * 1.01;
    }
}
BENCHMARK(BM_TwoBarrierSeries);

static void BM_ExplosionTime(benchmark::State& state) {
    OsgoodProblem p;
    p.a = FunctionExpr::parse("t", "t");
    p.b = FunctionExpr::parse("x^2");
    p.l = ExtReal(0.0);
    for (auto _ : state) benchmark::DoNotOptimize(ode_explosion_time(p, 0.0, 1.0).time);
}
BENCHMARK(BM_ExplosionTime)->Unit(benchmark::kMicrosecond);

static void BM_BrownianExit(benchmark::State& state) {
    const BarrierPair bp(ExtReal(-1.0), ExtReal(1.0));
    ExitOptions o;
    o.n_paths = static_cast<std::size_t>(state.range(0));
    o.seed = 1;
    o.clock_step = 1e-3;
    for (auto _ : state) benchmark::DoNotOptimize(simulate_brownian_exit(bp, 2.0, o).exploded());
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BrownianExit)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_EulerQuartic(benchmark::State& state) {
    OsgoodProblem p;
    p.b = FunctionExpr::parse("8*x^2 - 36*x + 48");
    p.r = 2.25;
    p.xi = 1.0;
    NoiseSpec n;
    n.f = FunctionExpr::constant(1.0, "t");
    EulerOptions o;
    o.n_paths = 100;
    o.t_max = 5.0;
    o.base_step = 1e-3;
    o.seed = 2;
    for (auto _ : state) benchmark::DoNotOptimize(simulate_sde_euler(p, n, o).exploded());
}
BENCHMARK(BM_EulerQuartic)->Unit(benchmark::kMillisecond);

static void BM_ForwardPde(benchmark::State& state) {
    PdeProblem p;
    p.sigma = FunctionExpr::parse("exp(x)");
    p.b = FunctionExpr::parse("exp(2*x)");
    p.bc = BoundaryCase::RightOnly;
    p.x_lo = -2.0;
    p.x_hi = 10.0;
    p.nx = static_cast<int>(state.range(0));
    p.nt = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(solve_forward(p).u_max);
}
BENCHMARK(BM_ForwardPde)->Arg(200)->Arg(400)->Arg(800)->Unit(benchmark::kMillisecond);

static void BM_Resolvent(benchmark::State& state) {
    ResolventProblem p;
    p.lambda = 1.0;
    p.nx = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(solve_resolvent_ode(p).w.front());
}
BENCHMARK(BM_Resolvent)->Arg(4000)->Arg(16000)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
