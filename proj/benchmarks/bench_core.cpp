#include <benchmark/benchmark.h>

#include "ergctl/dynkin.hpp"
#include "ergctl/model.hpp"
#include "ergctl/operators.hpp"
#include "ergctl/simulate.hpp"

using namespace ergctl;

static ModelSpec bench_model() {
    return make_ou_inventory_model(0.0, 1.0, 0.5, 0.5, 0.5, 0.3, 1.0, 1.0);
}

static void BM_AssembleElliptic(benchmark::State& state) {
    const ModelSpec spec = bench_model();
    const int n = static_cast<int>(state.range(0));
    const Grid2D grid = build_grid(-4, 4, n, spec.factor_domain.lo,
                                   spec.factor_domain.hi, n);
    for (auto _ : state) {
        auto op = assemble_generator(spec, grid, Scheme::EllipticNinePoint);
        benchmark::DoNotOptimize(op.c0.data());
    }
}
BENCHMARK(BM_AssembleElliptic)->Arg(101)->Arg(201);

static void BM_OperatorApply(benchmark::State& state) {
    const ModelSpec spec = bench_model();
    const int n = static_cast<int>(state.range(0));
    const Grid2D grid = build_grid(-4, 4, n, spec.factor_domain.lo,
                                   spec.factor_domain.hi, n);
    const auto op = assemble_generator(spec, grid, Scheme::EllipticNinePoint);
    std::vector<double> u(grid.size(), 1.0), out;
    for (auto _ : state) {
        op.apply(u, out, true);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_OperatorApply)->Arg(101)->Arg(201);

static void BM_SolveDynkin(benchmark::State& state) {
    const ModelSpec spec = bench_model();
    const int n = static_cast<int>(state.range(0));
    const Grid2D grid = build_grid(-4, 4, n, spec.factor_domain.lo,
                                   spec.factor_domain.hi, n);
    const auto op = assemble_generator(spec, grid, Scheme::EllipticNinePoint);
    SolverConfig cfg;
    for (auto _ : state) {
        auto U = solve_dynkin(op, spec, grid, cfg);
        benchmark::DoNotOptimize(U.values.data());
    }
}
BENCHMARK(BM_SolveDynkin)->Arg(51)->Arg(101)->Unit(benchmark::kMillisecond);

static void BM_SimulateReflected(benchmark::State& state) {
    const ModelSpec spec = bench_model();
    FreeBoundaries fb;
    fb.y_nodes = {spec.factor_domain.lo, spec.factor_domain.hi};
    fb.a_plus = {-1.0, -1.2};
    fb.a_minus = {1.2, 1.0};
    fb.sup_a_plus = -1.0;
    fb.inf_a_minus = 1.0;
    SimConfig cfg;
    cfg.T = 10.0;
    cfg.dt = 1e-3;
    cfg.n_paths = 4;
    cfg.n_threads = 1;
    for (auto _ : state) {
        auto est = simulate_reflected(spec, fb, 0.0, 0.0, cfg);
        benchmark::DoNotOptimize(est.mean_cost);
    }
}
BENCHMARK(BM_SimulateReflected)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
