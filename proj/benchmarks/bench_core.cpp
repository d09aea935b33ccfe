#include <benchmark/benchmark.h>

#include "acstokes/asymptotics.hpp"
#include "acstokes/diffuse.hpp"

using namespace acstokes;

namespace {

const OptimalProfile& profile() {
    static OptimalProfile P = optimal_profile(DoubleWell::quartic());
    return P;
}

void BM_ProfileBuild(benchmark::State& state) {
    for (auto _ : state) {
        auto P = optimal_profile(DoubleWell::quartic(), 40.0, static_cast<int>(state.range(0)));
        benchmark::DoNotOptimize(P.sigma);
    }
}
BENCHMARK(BM_ProfileBuild)->Arg(1024)->Arg(4096);

void BM_SolveLinearized(benchmark::State& state) {
    const auto& P = profile();
    for (auto _ : state) {
        auto u = solve_linearized(P.ddtheta, P);
        benchmark::DoNotOptimize(u.data());
    }
}
BENCHMARK(BM_SolveLinearized);

void BM_ClosestPoint(benchmark::State& state) {
    auto curve = ClosedCurve::ellipse({0.5, 0.5}, 0.32, 0.22);
    TubularChart chart(curve);
    double x = 0.3, y = 0.4, acc = 0.0;
    for (auto _ : state) {
        auto sd = chart.signed_distance({x, y});
        acc += sd.d;
        x = 0.3 + 0.37 * std::fmod(x + 0.061, 0.5);
        y = 0.4 + 0.21 * std::fmod(y + 0.043, 0.3);
        benchmark::DoNotOptimize(acc);
    }
}
BENCHMARK(BM_ClosestPoint);

void BM_StokesPeriodic(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Grid2D grid{n};
    FaceField F;
    F.fu.assign(grid.cells(), 0.0);
    F.fv.assign(grid.cells(), 0.0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            F.fu[grid.idx(i, j)] = std::sin(2 * M_PI * j / n);
            F.fv[grid.idx(i, j)] = std::cos(2 * M_PI * i / n);
        }
    for (auto _ : state) {
        auto vel = stokes_solve(grid, F, BoundaryMode::Periodic);
        benchmark::DoNotOptimize(vel.max_norm());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_StokesPeriodic)->Arg(128)->Arg(256)->Complexity();

void BM_StokesDirichlet(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Grid2D grid{n};
    FaceField F;
    F.fu.assign(static_cast<size_t>(n + 1) * n, 0.0);
    F.fv.assign(static_cast<size_t>(n) * (n + 1), 0.0);
    for (int j = 0; j < n; ++j)
        for (int i = 1; i < n; ++i)
            F.fu[static_cast<size_t>(j) * (n + 1) + i] = std::sin(2 * M_PI * j / n);
    for (auto _ : state) {
        auto vel = stokes_solve(grid, F, BoundaryMode::Dirichlet);
        benchmark::DoNotOptimize(vel.max_norm());
    }
}
BENCHMARK(BM_StokesDirichlet)->Arg(64)->Arg(128);

void BM_DiffuseStep(benchmark::State& state) {
    const auto& P = profile();
    DiffuseOptions opts;
    opts.eps = 0.08;
    opts.grid_n = static_cast<int>(state.range(0));
    auto curve = ClosedCurve::circle({0.5, 0.5}, 0.3);
    TubularChart chart(curve, opts.delta);
    Grid2D grid{opts.grid_n};
    DiffuseState st;
    st.c = init_phase(chart, opts.eps, P, grid, opts.bc, opts.delta);
    st.vel = VelocityField(grid, opts.bc);
    st.eps = opts.eps;
    st.initial_sup = 1.0;
    const double dt = 0.1 * opts.eps * opts.eps;
    for (auto _ : state) {
        auto next = step(st, dt, opts, P);
        benchmark::DoNotOptimize(next.c.data());
    }
}
BENCHMARK(BM_DiffuseStep)->Arg(64)->Arg(128);

void BM_SharpStep(benchmark::State& state) {
    SharpOptions opts;
    opts.sigma = 0.0;
    SharpState st{ClosedCurve::circle({0.0, 0.0}, 1.0, 0.0, static_cast<int>(state.range(0))),
                  0.0};
    for (auto _ : state) {
        auto next = step_sharp(st, 1e-5, opts);
        benchmark::DoNotOptimize(next.time);
    }
}
BENCHMARK(BM_SharpStep)->Arg(64)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
