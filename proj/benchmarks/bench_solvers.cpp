#include <benchmark/benchmark.h>

#include <cmath>

#include "sfd/asymptotics.hpp"
#include "sfd/profile_ode.hpp"
#include "sfd/radial_pde.hpp"
#include "sfd/steady_state.hpp"

namespace {

void BM_ProfileIntegrate(benchmark::State& state) {
    const auto params = sfd::ProfileParams::self_similar(2.0, 0.25, 1.0, 1);
    sfd::ProfileOptions opts;
    opts.xi_max = static_cast<double>(state.range(0));
    for (auto _ : state) {
        auto prof = sfd::integrate_profile(params, opts);
        benchmark::DoNotOptimize(prof.f.back());
    }
}
BENCHMARK(BM_ProfileIntegrate)->Arg(50)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_SteadyShoot(benchmark::State& state) {
    const double p = static_cast<double>(state.range(0));
    for (auto _ : state) {
        auto w = sfd::shoot_unit_profile(p, 3);
        benchmark::DoNotOptimize(w.center_value);
    }
}
BENCHMARK(BM_SteadyShoot)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_ImplicitStep(benchmark::State& state) {
    const auto nodes = static_cast<std::size_t>(state.range(0));
    const auto field = sfd::RadialField::initial(sfd::InitialDatum::algebraic(2.0), 2.0, 1,
                                                 sfd::build_grid(100.0, nodes), 1e-6);
    for (auto _ : state) {
        auto next = sfd::step_implicit(field, 1e-2);
        benchmark::DoNotOptimize(next.u[0]);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ImplicitStep)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oN);

void BM_FitDecay(benchmark::State& state) {
    std::vector<double> t, v;
    for (int k = 0; k <= 80; ++k) {
        t.push_back(std::pow(10.0, k / 20.0));
        v.push_back(5.0 * std::pow(t.back(), -0.3));
    }
    for (auto _ : state) {
        auto fit = sfd::fit_decay(t, v, {1.0, 1e4});
        benchmark::DoNotOptimize(fit.slope);
    }
}
BENCHMARK(BM_FitDecay);

}  // namespace

BENCHMARK_MAIN();
