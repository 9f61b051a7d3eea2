#include <array>

#include <benchmark/benchmark.h>

#include "mfhawkes/cox.hpp"
#include "mfhawkes/fluctuation.hpp"
#include "mfhawkes/volterra.hpp"

using namespace mfh;

namespace
{
ModelSpec sigmoid()
{
    std::array<double, 2> p{2.0, 2.0};
    return builtin_model(BuiltinFamily::sigmoid_erlang, p);
}

SeedPolicy seed()
{
    SeedPolicy s;
    s.master_seed = 7;
    return s;
}

void BM_SolveLimit(benchmark::State& state)
{
    auto const spec = sigmoid();
    TimeGrid const g(10.0, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_limit(spec, g));
}
BENCHMARK(BM_SolveLimit)->Arg(500)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Thinning(benchmark::State& state)
{
    auto const spec = sigmoid();
    TimeGrid const g(10.0, 1000);
    auto const N = static_cast<std::size_t>(state.range(0));
    std::uint64_t rep = 0;
    std::size_t events = 0;
    for (auto _ : state)
    {
        auto const sim = simulate_hawkes(spec, N, g, seed(), rep++);
        events += sim.events.total_events();
    }
    state.counters["events/s"] =
        benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_Thinning)->Arg(50)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);

void BM_Euler(benchmark::State& state)
{
    auto const spec = sigmoid();
    TimeGrid const g(10.0, 1000);
    SimOptions opts;
    opts.mode = SimMode::euler;
    std::uint64_t rep = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(simulate_hawkes(spec, 200, g, seed(), rep++, opts));
}
BENCHMARK(BM_Euler)->Unit(benchmark::kMillisecond);

void BM_Kappa(benchmark::State& state)
{
    auto const spec = sigmoid();
    TimeGrid const g(10.0, static_cast<std::size_t>(state.range(0)));
    auto const lim = solve_limit(spec, g);
    for (auto _ : state)
        benchmark::DoNotOptimize(build_kappa(lim, spec, g));
}
BENCHMARK(BM_Kappa)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_ResolventIeq(benchmark::State& state)
{
    auto const spec = sigmoid();
    TimeGrid const g(10.0, static_cast<std::size_t>(state.range(0)));
    auto const kt = build_kappa(solve_limit(spec, g), spec, g);
    for (auto _ : state)
        benchmark::DoNotOptimize(build_resolvent_ieq(kt));
}
BENCHMARK(BM_ResolventIeq)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_ResolventNeumann(benchmark::State& state)
{
    auto const spec = sigmoid();
    TimeGrid const g(10.0, static_cast<std::size_t>(state.range(0)));
    auto const kt = build_kappa(solve_limit(spec, g), spec, g);
    for (auto _ : state)
        benchmark::DoNotOptimize(build_resolvent_neumann(kt, 1e-10));
}
BENCHMARK(BM_ResolventNeumann)->Arg(250)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_SampleLimit(benchmark::State& state)
{
    auto const spec = sigmoid();
    TimeGrid const g(10.0, 1000);
    auto const lim = solve_limit(spec, g);
    auto const kt = build_kappa(lim, spec, g);
    auto const res = build_resolvent_ieq(kt);
    auto const route = state.range(0) ? LimitRoute::fixed_point : LimitRoute::resolvent;
    std::uint64_t rep = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(
            sample_limit(lim, spec, LimitOperators{&kt, &res}, seed(), rep++, route));
    state.SetLabel(std::string(to_string(route)));
}
BENCHMARK(BM_SampleLimit)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_BuildCox(benchmark::State& state)
{
    auto const spec = sigmoid();
    TimeGrid const g(10.0, 1000);
    auto const lim = solve_limit(spec, g);
    auto const kt = build_kappa(lim, spec, g);
    auto const draw = sample_limit(lim, spec, LimitOperators{&kt, nullptr},
                                   cox_noise_seed(seed()), 0, LimitRoute::fixed_point);
    std::uint64_t rep = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(build_cox(lim, draw.sigma, 200, g, seed(), rep++));
}
BENCHMARK(BM_BuildCox)->Unit(benchmark::kMillisecond);
}  // namespace
BENCHMARK_MAIN();
