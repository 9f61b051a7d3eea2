#include <array>
#include <cmath>

#include "doctest.h"
#include "mfhawkes/limit.hpp"
#include "support.hpp"

using namespace mfh;

namespace
{
double max_error(GridFunction const& f, std::function<double(double)> const& exact)
{
    double e = 0;
    for (std::size_t k = 0; k < f.size(); ++k)
        e = std::max(e, std::abs(f[k] - exact(f.grid.time(k))));
    return e;
}

//! RK4 on the ODE system equivalent to the Erlang-kernel limit
std::vector<double> erlang_ode_x(ModelSpec const& spec, double beta, double T,
                                 std::size_t n)
{
    double const dt = T / static_cast<double>(n);
    std::array<double, 2> y{0.0, 0.0};
    auto rhs = [&](std::array<double, 2> const& v) {
        double const x = beta * beta * v[1];
        return std::array<double, 2>{spec.f(x) - beta * v[0], v[0] - beta * v[1]};
    };
    std::vector<double> x(n + 1, 0.0);
    for (std::size_t k = 1; k <= n; ++k)
    {
        auto const k1 = rhs(y);
        auto const k2 = rhs({y[0] + 0.5 * dt * k1[0], y[1] + 0.5 * dt * k1[1]});
        auto const k3 = rhs({y[0] + 0.5 * dt * k2[0], y[1] + 0.5 * dt * k2[1]});
        auto const k4 = rhs({y[0] + dt * k3[0], y[1] + dt * k3[1]});
        for (int i = 0; i < 2; ++i)
            y[i] += dt / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        x[k] = beta * beta * y[1];
    }
    return x;
}
}  // namespace

TEST_SUITE("limit")
{
TEST_CASE("constant rate has a closed-form input")
{
    double const c = 1.3, beta = 2.0;
    auto const spec = test::constant(c, beta);
    auto const sol = solve_limit(spec, TimeGrid(5.0, 2000));
    CHECK(max_error(sol.lambda, [&](double) { return c; }) == 0.0);
    CHECK(max_error(sol.m, [&](double t) { return c * t; }) < 1e-12);
    CHECK(max_error(sol.x, [&](double t) {
              return c * (1 - std::exp(-beta * t) * (1 + beta * t));
          })
          < 1e-5);
}

TEST_CASE("linear toy matches the hyperbolic cosine solution")
{
    double const a = 0.5, c = 0.8, T = 3.0;
    auto const spec = test::linear_toy(a, c);
    auto exact = [&](double t) { return a / c * (std::cosh(std::sqrt(c) * t) - 1); };
    double const e1 = max_error(solve_limit(spec, TimeGrid(T, 200)).x, exact);
    double const e2 = max_error(solve_limit(spec, TimeGrid(T, 400)).x, exact);
    CHECK(e2 < 1e-3);
    CHECK(e1 / e2 > 3.5);
    CHECK(e1 / e2 < 4.5);
}

TEST_CASE("sigmoid limit agrees with the ODE reduction")
{
    double const beta = 2.0, T = 10.0;
    auto const spec = test::sigmoid(2.0, beta);
    auto const ref = erlang_ode_x(spec, beta, T, 20000);
    double errs[2];
    std::size_t const steps[2] = {500, 1000};
    for (int r = 0; r < 2; ++r)
    {
        auto const sol = solve_limit(spec, TimeGrid(T, steps[r]));
        std::size_t const stride = 20000 / steps[r];
        double e = 0;
        for (std::size_t k = 0; k < sol.x.size(); ++k)
            e = std::max(e, std::abs(sol.x[k] - ref[k * stride]));
        errs[r] = e;
    }
    CHECK(errs[1] < 1e-4);
    CHECK(errs[0] / errs[1] > 3.5);
    CHECK(errs[0] / errs[1] < 4.5);
}

TEST_CASE("stable sigmoid approaches its fixed point")
{
    auto const sol = solve_limit(test::sigmoid(2.0, 2.0), TimeGrid(40.0, 2000));
    CHECK(sol.x.values.back() == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(sol.lambda.values.back() == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("compensator is the running integral of the rate")
{
    auto const sol = solve_limit(test::sigmoid(5.0, 4.0), TimeGrid(10.0, 1000));
    CHECK(sol.lambda[0] == doctest::Approx(test::sigmoid(5.0, 4.0).f(0.0)));
    for (std::size_t k = 1; k < sol.m.size(); ++k)
    {
        REQUIRE(sol.m[k] >= sol.m[k - 1]);
        REQUIRE(sol.lambda[k] >= 0);
    }
}

TEST_CASE("single-class multiclass solve is bit-identical")
{
    auto const spec = test::sigmoid(4.0, 2.0);
    TimeGrid const grid(10.0, 500);
    auto const a = solve_limit(spec, grid);
    auto const b = solve_limit_multiclass(MultiClassSpec::from_scalar(spec), grid);
    REQUIRE(b.size() == 1);
    CHECK(a.x.values == b[0].x.values);
    CHECK(a.lambda.values == b[0].lambda.values);
    CHECK(a.m.values == b[0].m.values);
}

TEST_CASE("two symmetric classes reproduce the scalar limit")
{
    // class kernels halve the scalar one, so each class sees the same input
    auto const spec = test::sigmoid(2.0, 2.0);
    MultiClassSpec mc;
    mc.rates = {spec.rate, spec.rate};
    mc.kernels.assign(4, MemoryKernel::erlang(2.0, 0.5));
    mc.proportions = {0.5, 0.5};
    TimeGrid const grid(10.0, 500);
    auto const a = solve_limit(spec, grid);
    auto const b = solve_limit_multiclass(mc, grid);
    for (auto const& cls : b)
        CHECK(max_error(cls.x, [&](double t) { return a.x.at(t); }) < 1e-12);
}

TEST_CASE("negative rates are rejected")
{
    UserModelInput in;
    in.f = "x - 1";
    in.h = "t*exp(-t)";
    auto const spec = user_model(in);
    CHECK_THROWS_AS(solve_limit(spec, TimeGrid(1.0, 10)), std::domain_error);
}

TEST_CASE("grid refinement is second order")
{
    auto const spec = test::sigmoid(2.0, 2.0);
    auto const a = solve_limit(spec, TimeGrid(10.0, 250));
    auto const b = solve_limit(spec, TimeGrid(10.0, 500));
    auto const c = solve_limit(spec, TimeGrid(10.0, 1000));
    double d1 = 0, d2 = 0;
    for (std::size_t k = 0; k < a.x.size(); ++k)
    {
        d1 = std::max(d1, std::abs(a.x[k] - b.x[2 * k]));
        d2 = std::max(d2, std::abs(b.x[2 * k] - c.x[4 * k]));
    }
    CHECK(d1 / d2 > 3.5);
    CHECK(d1 / d2 < 4.5);
}

TEST_CASE("a priori growth bound and rate consistency")
{
    for (auto const& spec : {test::sigmoid(2.0, 2.0), test::sigmoid(5.0, 4.0),
                             test::linear_toy(0.5, 0.8)})
    {
        TimeGrid const g(5.0, 500);
        auto const sol = solve_limit(spec, g);
        for (std::size_t k = 0; k < g.size(); ++k)
        {
            double const t = g.time(k);
            double const bound
                = spec.f(0.0) * std::exp(spec.sup_f_prime() * spec.kernel.norms(t).sup_h * t);
            REQUIRE(sol.lambda[k] <= bound * (1 + 1e-12));
            REQUIRE(sol.lambda[k] == spec.f(sol.x[k]));
        }
    }
}
}
