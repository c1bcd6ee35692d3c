#include <benchmark/benchmark.h>

#include "fastconv/diagnostics.hpp"
#include "fastconv/operators.hpp"
#include "fastconv/stepper.hpp"

namespace {

using namespace fastconv;

RunConfig bench_config(std::int64_t n) {
    RunConfig cfg;
    const double h = 20.0 / static_cast<double>(n);
    cfg.grid = Grid::centered(2, std::vector<double>{-10.0, -10.0},
                              std::vector<double>{10.0, 10.0}, std::vector<double>{h, h});
    cfg.op.kind = OperatorKind::reduced_laplacian;
    cfg.flux.q = 0.75;
    cfg.init.kind = InitialRecipe::Kind::gaussian;
    cfg.init.param = 1.0;
    return cfg;
}

void bm_imex_step(benchmark::State& state) {
    const RunConfig cfg = bench_config(state.range(0));
    const Field u0 = make_initial(cfg.init, cfg.mass, cfg.grid);
    const double dt = cfl_dt(cfg, u0, 0.0, 1.0);
    for (auto _ : state) {
        Field u = step_imex(cfg, u0, dt);
        benchmark::DoNotOptimize(u[0]);
    }
    state.SetItemsProcessed(state.iterations() * cfg.grid.cell_count());
}

void bm_implicit_diffusion(benchmark::State& state) {
    const RunConfig cfg = bench_config(state.range(0));
    const Field u0 = make_initial(cfg.init, cfg.mass, cfg.grid);
    for (auto _ : state) {
        Field u = implicit_diffusion(cfg, u0, 1e-3);
        benchmark::DoNotOptimize(u[0]);
    }
    state.SetItemsProcessed(state.iterations() * cfg.grid.cell_count());
}

void bm_gradient_energy(benchmark::State& state) {
    const RunConfig cfg = bench_config(state.range(0));
    const Field u0 = make_initial(cfg.init, cfg.mass, cfg.grid);
    for (auto _ : state) {
        benchmark::DoNotOptimize(gradient_energy(cfg.op, u0));
    }
    state.SetItemsProcessed(state.iterations() * cfg.grid.cell_count());
}

void bm_lp_norm(benchmark::State& state) {
    const RunConfig cfg = bench_config(state.range(0));
    const Field u0 = make_initial(cfg.init, cfg.mass, cfg.grid);
    for (auto _ : state) {
        benchmark::DoNotOptimize(lp_norm(u0, 1.0));
    }
    state.SetItemsProcessed(state.iterations() * cfg.grid.cell_count());
}

BENCHMARK(bm_imex_step)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_implicit_diffusion)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_gradient_energy)->Arg(256)->Arg(512);
BENCHMARK(bm_lp_norm)->Arg(256)->Arg(512);

}  // namespace

BENCHMARK_MAIN();
