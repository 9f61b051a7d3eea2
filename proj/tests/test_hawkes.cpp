#include <cmath>

#include "doctest.h"
#include "mfhawkes/hawkes.hpp"
#include "mfhawkes/stats.hpp"
#include "support.hpp"

using namespace mfh;

TEST_SUITE("hawkes")
{
TEST_CASE("mode names")
{
    CHECK(parse_sim_mode("euler") == SimMode::euler);
    CHECK(to_string(parse_sim_mode("thinning")) == "thinning");
    CHECK_THROWS_AS(parse_sim_mode("tau-leap"), std::invalid_argument);
}

TEST_CASE("simulation is reproducible per replicate")
{
    auto const spec = test::sigmoid(2.0, 2.0);
    TimeGrid const g(10.0, 500);
    auto const a = simulate_hawkes(spec, 30, g, test::seed(11), 4);
    auto const b = simulate_hawkes(spec, 30, g, test::seed(11), 4);
    auto const c = simulate_hawkes(spec, 30, g, test::seed(11), 5);
    CHECK(a.events.times == b.events.times);
    CHECK(a.lambda_path.values == b.lambda_path.values);
    CHECK(a.events.times != c.events.times);
    CHECK(a.events.unit_count() == 30);
    CHECK_NOTHROW(a.events.validate());
    CHECK(a.diagnostics.replicate == 4);
    CHECK(a.diagnostics.max_dominating_rate >= a.lambda_path.sup_norm());
}

TEST_CASE("recorded intensity matches the event history")
{
    auto const spec = test::sigmoid(5.0, 4.0);
    TimeGrid const g(10.0, 200);
    auto const sim = simulate_hawkes(spec, 25, g, test::seed(3), 0);
    REQUIRE(sim.events.total_events() > 0);
    for (std::size_t k = 0; k < g.size(); k += 7)
    {
        double const t = g.time(k);
        CHECK(sim.lambda_path[k]
              == doctest::Approx(recompute_intensity(spec, sim.events, t))
                     .epsilon(1e-10));
        CHECK(sim.lambda_path[k] == doctest::Approx(spec.f(sim.input_path[k])));
    }
    double cum = 0;
    for (std::size_t k = 1; k < g.size(); ++k)
        cum += 0.5 * g.dt() * (sim.lambda_path[k - 1] + sim.lambda_path[k]);
    CHECK(sim.Lambda_path.values.back() == doctest::Approx(cum).epsilon(1e-12));
}

TEST_CASE("constant rate thinning equals deterministic thinning")
{
    auto const spec = test::constant(1.7);
    TimeGrid const g(5.0, 100);
    auto const sim = simulate_hawkes(spec, 40, g, test::seed(8), 2);
    auto const lim = solve_limit(spec, g);
    auto const poi = simulate_coupled_poisson(spec, 40, g, lim, test::seed(8), 2);
    CHECK(sim.events.times == poi.times);
}

TEST_CASE("constant rate counts are Poisson")
{
    double const c = 1.5, T = 4.0;
    auto const spec = test::constant(c);
    TimeGrid const g(T, 40);
    std::vector<double> counts;
    for (std::uint64_t r = 0; r < 200; ++r)
    {
        auto const sim = simulate_hawkes(spec, 10, g, test::seed(21), r);
        for (auto const& u : sim.events.times)
            counts.push_back(static_cast<double>(u.size()));
    }
    auto const s = summarize(counts);
    CHECK(std::abs(s.mean - c * T) < 4 * s.std_error);
    // Poisson dispersion: variance equals the mean
    double const var_se = std::sqrt((2 * c * T * c * T + c * T) / counts.size());
    CHECK(std::abs(s.variance - c * T) < 4 * var_se);
}

TEST_CASE("layer height changes the measure, not the law")
{
    double const c = 2.3, T = 3.0;
    auto const spec = test::constant(c);
    TimeGrid const g(T, 30);
    SeedPolicy thin = test::seed(4);
    thin.layer_height = 0.4;
    std::vector<double> counts;
    for (std::uint64_t r = 0; r < 100; ++r)
    {
        auto const sim = simulate_hawkes(spec, 10, g, thin, r);
        CHECK(sim.diagnostics.layers == 6);  // per unit: ceil(c / height)
        for (auto const& u : sim.events.times)
            counts.push_back(static_cast<double>(u.size()));
    }
    auto const s = summarize(counts);
    CHECK(std::abs(s.mean - c * T) < 4 * s.std_error);
}

TEST_CASE("euler converges to thinning under common randomness")
{
    auto const spec = test::sigmoid(2.0, 2.0);
    double gaps[2];
    std::size_t const steps[2] = {100, 800};
    for (int r = 0; r < 2; ++r)
    {
        TimeGrid const g(5.0, steps[r]);
        SimOptions euler;
        euler.mode = SimMode::euler;
        euler.euler_error_rate = 1.0;
        double sum = 0;
        for (std::uint64_t rep = 0; rep < 20; ++rep)
        {
            auto const a = simulate_hawkes(spec, 20, g, test::seed(9), rep);
            auto const b = simulate_hawkes(spec, 20, g, test::seed(9), rep, euler);
            CHECK_NOTHROW(b.events.validate());
            sum += counting_distance(a.events.merged_times(), b.events.merged_times());
        }
        gaps[r] = sum / 20;
    }
    CHECK(gaps[1] < gaps[0]);
}

TEST_CASE("euler refuses coarse grids")
{
    auto const spec = test::constant(5.0);
    SimOptions euler;
    euler.mode = SimMode::euler;
    CHECK_THROWS_AS(simulate_hawkes(spec, 10, TimeGrid(10.0, 20), test::seed(1), 0, euler),
                    std::runtime_error);
    euler.euler_error_rate = 1.0;
    auto const sim = simulate_hawkes(spec, 10, TimeGrid(10.0, 20), test::seed(1), 0, euler);
    CHECK(sim.diagnostics.truncation_rate > euler.euler_warn_rate);
    CHECK_FALSE(sim.diagnostics.warnings.empty());
    // at most one jump per unit and cell
    for (auto const& u : sim.events.times)
        for (std::size_t k = 1; k < u.size(); ++k)
            CHECK(TimeGrid(10.0, 20).cell(u[k]) != TimeGrid(10.0, 20).cell(u[k - 1]));
}

TEST_CASE("explosive rates are reported")
{
    auto const spec = test::linear_toy(1.0, 5.0);
    SimOptions opts;
    opts.max_dominating_rate = 50;
    CHECK_THROWS_AS(simulate_hawkes(spec, 10, TimeGrid(10.0, 100), test::seed(1), 0, opts),
                    std::runtime_error);
    CHECK_THROWS_AS(simulate_hawkes(spec, 0, TimeGrid(10.0, 100), test::seed(1), 0),
                    std::invalid_argument);
}

TEST_CASE("single-class multiclass run is identical")
{
    auto const spec = test::sigmoid(4.0, 2.0);
    TimeGrid const g(10.0, 200);
    auto const a = simulate_hawkes(spec, 20, g, test::seed(6), 1);
    auto const b = simulate_hawkes_multiclass(MultiClassSpec::from_scalar(spec), 20, g,
                                              test::seed(6), 1);
    CHECK(a.events.times == b.events.times);
    CHECK(a.lambda_path.values == b.lambda_path[0].values);
}

TEST_CASE("thin_deterministic clips negative intensity")
{
    TimeGrid const g(2.0, 20);
    GridFunction neg(g, -1.0);
    auto const e = thin_deterministic(g, {0, 0, 0}, {neg}, test::seed(2), 0);
    CHECK(e.total_events() == 0);
    CHECK_THROWS_AS(thin_deterministic(g, {1}, {neg}, test::seed(2), 0),
                    std::invalid_argument);
}

TEST_CASE("coincident times are separated")
{
    EventPaths e(TimeGrid(1.0, 10), 2);
    e.times[0] = {0.25, 0.5};
    e.times[1] = {0.5};
    enforce_distinct_times(e);
    CHECK_NOTHROW(e.validate());
    CHECK(e.total_events() == 3);
}

TEST_CASE("euler count bias shrinks with the step")
{
    auto const spec = test::sigmoid(2.0, 2.0);
    SimOptions euler;
    euler.mode = SimMode::euler;
    euler.euler_error_rate = 1.0;
    double gaps[2];
    std::size_t const steps[2] = {50, 200};
    for (int r = 0; r < 2; ++r)
    {
        TimeGrid const g(5.0, steps[r]);
        double diff = 0;
        for (std::uint64_t rep = 0; rep < 40; ++rep)
        {
            auto const a = simulate_hawkes(spec, 20, g, test::seed(14), rep);
            auto const b = simulate_hawkes(spec, 20, g, test::seed(14), rep, euler);
            diff += static_cast<double>(a.events.total_events())
                    - static_cast<double>(b.events.total_events());
        }
        gaps[r] = std::abs(diff) / 40;
    }
    // dt shrinks fourfold; allow Monte Carlo slack around the O(dt) ratio
    CHECK(gaps[1] < 0.5 * gaps[0]);
}

TEST_CASE("units are exchangeable")
{
    auto const spec = test::sigmoid(2.0, 2.0);
    TimeGrid const g(5.0, 100);
    std::vector<double> first, last;
    for (std::uint64_t r = 0; r < 300; ++r)
    {
        auto const sim = simulate_hawkes(spec, 10, g, test::seed(15), r);
        first.push_back(static_cast<double>(sim.events.times.front().size()));
        last.push_back(static_cast<double>(sim.events.times.back().size()));
    }
    CHECK(two_sample_ks(first, last).p_value > 0.01);
}
}
