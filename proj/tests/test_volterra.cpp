#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "mfhawkes/volterra.hpp"
#include "support.hpp"

using namespace mfh;

namespace
{
double table_error(TriangularTable const& t, TimeGrid const& g,
                   std::function<double(double, double)> const& exact)
{
    double e = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j <= i; ++j)
            e = std::max(e, std::abs(t(i, j) - exact(g.time(i), g.time(j))));
    return e;
}

double max_gap(GridFunction const& a, std::function<double(double)> const& exact)
{
    double e = 0;
    for (std::size_t k = 0; k < a.size(); ++k)
        e = std::max(e, std::abs(a[k] - exact(a.grid.time(k))));
    return e;
}
}  // namespace

TEST_SUITE("volterra")
{
TEST_CASE("triangular table layout")
{
    TriangularTable t(4, 2);
    t.at(3, 1, 1, 0) = 7.0;
    t.at(2, 2, 0, 1) = -9.0;
    CHECK(t.at(3, 1, 1, 0) == 7.0);
    CHECK(t.row(3)[1 * 4 + 2] == 7.0);
    CHECK(t.max_abs() == 9.0);
    CHECK_THROWS_AS(TriangularTable(4, 0), std::invalid_argument);
    CHECK(parse_resolvent_method("ieq") == ResolventMethod::integral_equation);
    CHECK(to_string(parse_resolvent_method("neumann")) == "neumann");
    CHECK_THROWS(parse_resolvent_method("lu"));
}

TEST_CASE("kappa for the linear toy is c (t - s)")
{
    double const c = 0.7;
    auto const spec = test::linear_toy(0.2, c);
    TimeGrid const g(2.0, 200);
    auto const kt = build_kappa(solve_limit(spec, g), spec, g);
    CHECK(table_error(kt.kappa, g, [&](double t, double s) { return c * (t - s); })
          < 1e-12);
    CHECK(kt.bound == doctest::Approx(c * 2.0));
    CHECK(kappa_bound(spec, 2.0) == doctest::Approx(c * 2.0));
}

TEST_CASE("kappa matches adaptive quadrature for the sigmoid model")
{
    auto const spec = test::sigmoid(4.0, 2.0);
    double errs[2];
    std::size_t const steps[2] = {500, 1000};
    for (int r = 0; r < 2; ++r)
    {
        TimeGrid const g(10.0, steps[r]);
        auto const lim = solve_limit(spec, g);
        auto const kt = build_kappa(lim, spec, g);
        std::size_t const stride = steps[r] / 10;
        double worst = 0;
        for (std::size_t i = 0; i < g.size(); i += stride)
        {
            for (std::size_t j = 0; j <= i; j += stride / 2)
            {
                double const t = g.time(i), s = g.time(j);
                double ref = 0;
                if (t > s)
                    ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                        [&](double u) {
                            return spec.f_prime(lim.x.at(u)) * spec.h_prime(u - s);
                        },
                        s, t, 10, 1e-12);
                worst = std::max(worst, std::abs(kt.kappa(i, j) - ref));
            }
        }
        errs[r] = worst;
        CHECK(kt.kappa.max_abs() <= kt.bound);
    }
    // trapezoid in u: second order
    CHECK(errs[1] < 2e-4);
    CHECK(errs[0] / errs[1] > 3.5);
    CHECK(errs[0] / errs[1] < 4.5);
}

TEST_CASE("both resolvent builders hit the closed form")
{
    double const c = 1.0;
    auto const spec = test::linear_toy(0.3, c);
    TimeGrid const g(2.0, 400);
    auto const kt = build_kappa(solve_limit(spec, g), spec, g);
    auto exact = [&](double t, double s) {
        return std::sqrt(c) * std::sinh(std::sqrt(c) * (t - s));
    };
    auto const ieq = build_resolvent_ieq(kt);
    auto const neu = build_resolvent_neumann(kt, 1e-10);
    CHECK(table_error(ieq.K, g, exact) < 1e-4);
    CHECK(table_error(neu.K, g, exact) < 1e-4);
    CHECK(max_abs_difference(ieq.K, neu.K) < 1e-8);
    CHECK(neu.tail_bound < 1e-10);
    CHECK(neu.truncation_order > 1);
    CHECK(resolvent_identity_residual(kt, ieq) < 1e-12);
    CHECK(ieq.K.max_abs() <= ieq.a_priori_bound());
}

TEST_CASE("resolvent is identical across worker counts")
{
    auto const spec = test::sigmoid(2.0, 2.0);
    TimeGrid const g(10.0, 300);
    auto const kt = build_kappa(solve_limit(spec, g), spec, g);
    auto const a = build_resolvent_ieq(kt, 1);
    auto const b = build_resolvent_ieq(kt, 3);
    CHECK(max_abs_difference(a.K, b.K) == 0.0);
    auto const c = build_resolvent_neumann(kt, 1e-10, 1);
    auto const d = build_resolvent_neumann(kt, 1e-10, 3);
    CHECK(max_abs_difference(c.K, d.K) == 0.0);
}

TEST_CASE("neumann tail bound")
{
    CHECK(neumann_tail_bound(0.0, 5.0, 1) == 0.0);
    // order 0 tail is the full series sum_m M^m T^{m-1}/(m-1)! = M e^{MT}
    CHECK(neumann_tail_bound(0.5, 2.0, 0) == doctest::Approx(0.5 * std::exp(1.0)));
    double prev = INFINITY;
    for (std::size_t n = 1; n < 40; ++n)
    {
        double const t = neumann_tail_bound(1.0, 10.0, n);
        REQUIRE(t < prev);
        prev = t;
    }
    auto const spec = test::linear_toy(0.1, 4.0);
    TimeGrid const g(10.0, 50);
    auto const kt = build_kappa(solve_limit(spec, g), spec, g);
    CHECK_THROWS_AS(build_resolvent_neumann(kt, 1e-10), std::runtime_error);
    CHECK_THROWS_AS(build_resolvent_neumann(kt, 0.0), std::invalid_argument);
}

TEST_CASE("synthetic kernel with a nonzero diagonal")
{
    // kappa = 1 has resolvent exp(t - s)
    TimeGrid const g(1.0, 400);
    auto const kt = KernelTable::from_function(g, [](double, double) { return 1.0; });
    auto const r = build_resolvent_ieq(kt);
    CHECK(table_error(r.K, g, [](double t, double s) { return std::exp(t - s); })
          < 1e-5);
}

TEST_CASE("second-kind solve and the resolvent route agree")
{
    double const c = 0.5;
    auto const spec = test::linear_toy(0.3, c);
    TimeGrid const g(3.0, 600);
    auto const kt = build_kappa(solve_limit(spec, g), spec, g);
    GridFunction const one(g, 1.0);
    auto const G = solve_second_kind(kt, one);
    auto cosh_ref = [&](double t) { return std::cosh(std::sqrt(c) * t); };
    CHECK(max_gap(G, cosh_ref) < 1e-5);
    CHECK(second_kind_residual(kt, one, G).sup_norm() < 1e-12);
    auto const viaphi = apply_phi(build_resolvent_ieq(kt), one);
    CHECK(max_gap(viaphi, [&](double t) { return G.at(t); }) < 1e-10);
}

TEST_CASE("psi, xi and increment convolution")
{
    double const beta = 2.0;
    auto const spec = test::sigmoid(2.0, beta);
    TimeGrid const g(8.0, 800);
    GridFunction ramp(g);
    for (std::size_t k = 0; k < ramp.size(); ++k)
        ramp[k] = g.time(k);
    auto integral_h = [&](double t) {
        return 1 - std::exp(-beta * t) * (1 + beta * t);
    };
    // int_0^t s h'(t - s) ds = int_0^t h
    // trapezoid error ~ dt^2 T sup|h''| / 12
    double const trap = g.dt() * g.dt() * 8.0 * 2 * beta * beta * beta / 12;
    CHECK(max_gap(apply_psi(spec, ramp), integral_h) < 1.1 * trap);
    CHECK(max_gap(apply_psi(spec, GridFunction(g, 1.0)),
                  [&](double t) { return spec.h(t); })
          < 1.1 * trap);
    CHECK(max_gap(convolve_increments(spec.kernel, ramp), integral_h)
          < g.dt() * spec.kernel.norms(8.0).sup_h * 1.01);
    CHECK(apply_psi(MemoryKernel::zero(), ramp).sup_norm() == 0.0);

    auto const flat = test::constant(1.0);
    auto const lim = solve_limit(flat, g);
    CHECK(apply_xi(lim, flat, ramp).sup_norm() == 0.0);
    auto const lim2 = solve_limit(spec, g);
    auto const xi = apply_xi(lim2, spec, ramp);
    CHECK(xi[400] == doctest::Approx(spec.f_prime(lim2.x[400]) * 4.0));
}

TEST_CASE("resolvent lipschitz constant formula")
{
    auto const spec = test::sigmoid(2.0, 2.0);
    double const T = 10.0;
    auto const n = spec.kernel.norms(T);
    double const M = 0.5 * n.l1_h_prime, L = 0.5 * n.sup_h_prime;
    CHECK(resolvent_lipschitz_constant(spec, T)
          == doctest::Approx(L + M * std::exp(M * T) * (L * T + M)));
}

TEST_CASE("tables respect their a priori bounds")
{
    for (auto const& spec : {test::sigmoid(2.0, 2.0), test::sigmoid(4.0, 2.0),
                             test::sigmoid(5.0, 4.0)})
    {
        TimeGrid const g(10.0, 400);
        auto const kt = build_kappa(solve_limit(spec, g), spec, g);
        auto const r = build_resolvent_ieq(kt);
        CHECK(kt.kappa.max_abs() <= kt.bound);
        CHECK(kt.bound == doctest::Approx(kappa_bound(spec, 10.0)));
        CHECK(r.K.max_abs() <= r.a_priori_bound());
    }
}

TEST_CASE("resolvent is Lipschitz in its first argument")
{
    auto const spec = test::sigmoid(2.0, 2.0);
    double const T = 5.0;
    TimeGrid const g(T, 250);
    auto const kt = build_kappa(solve_limit(spec, g), spec, g);
    auto const r = build_resolvent_ieq(kt);
    double const C = resolvent_lipschitz_constant(spec, T);
    double const slack = 2 * resolvent_identity_residual(kt, r);
    for (std::size_t j = 0; j < g.size(); j += 10)
        for (std::size_t i1 = j; i1 < g.size(); i1 += 7)
            for (std::size_t i2 = i1 + 1; i2 < g.size(); i2 += 13)
                REQUIRE(std::abs(r.K(i1, j) - r.K(i2, j))
                        <= C * (g.time(i2) - g.time(i1)) + slack);
}

TEST_CASE("phi solves the second-kind equation")
{
    auto const spec = test::sigmoid(2.0, 2.0);
    TimeGrid const g(10.0, 500);
    auto const kt = build_kappa(solve_limit(spec, g), spec, g);
    auto const r = build_resolvent_ieq(kt);
    RandomStream rng(test::seed(31), StreamPurpose::aux, 0, 0);
    for (int trial = 0; trial < 10; ++trial)
    {
        // piecewise linear through 11 random knots
        std::vector<double> knots(11);
        for (auto& v : knots)
            v = 4 * rng.uniform() - 2;
        GridFunction F(g);
        for (std::size_t k = 0; k < g.size(); ++k)
        {
            double const u = g.time(k);
            auto const i = std::min<std::size_t>(9, static_cast<std::size_t>(u));
            F[k] = knots[i] + (u - i) * (knots[i + 1] - knots[i]);
        }
        auto const G = apply_phi(r, F);
        double const dt = g.dt();
        CHECK(second_kind_residual(kt, F, G).sup_norm()
              < 10 * dt * dt * (1 + F.sup_norm()));
    }
}

TEST_CASE("builders agree on every model")
{
    for (auto const& spec : {test::sigmoid(2.0, 2.0), test::sigmoid(5.0, 4.0),
                             test::constant(1.0), test::linear_toy(0.5, 0.5)})
    {
        TimeGrid const g(4.0, 200);
        auto const kt = build_kappa(solve_limit(spec, g), spec, g);
        auto const a = build_resolvent_ieq(kt);
        auto const b = build_resolvent_neumann(kt, 1e-10);
        CHECK(max_abs_difference(a.K, b.K) < 1e-10 + g.dt() * g.dt());
    }
}

TEST_CASE("block-diagonal kernels give a block-diagonal resolvent")
{
    auto const spec = test::sigmoid(2.0, 2.0);
    MultiClassSpec mc;
    mc.rates = {spec.rate, test::sigmoid(4.0, 2.0).rate};
    mc.kernels = {MemoryKernel::erlang(2.0), MemoryKernel::zero(), MemoryKernel::zero(),
                  MemoryKernel::erlang(3.0)};
    mc.proportions = {0.4, 0.6};
    TimeGrid const g(5.0, 150);
    auto const kt = build_kappa_multiclass(solve_limit_multiclass(mc, g), mc, g);
    for (auto const& r : {build_resolvent_ieq(kt), build_resolvent_neumann(kt, 1e-10)})
    {
        bool zero = true, diag = false;
        for (std::size_t i = 0; i < g.size(); ++i)
            for (std::size_t j = 0; j <= i; ++j)
            {
                zero = zero && r.K.at(i, j, 0, 1) == 0.0 && r.K.at(i, j, 1, 0) == 0.0;
                diag = diag || r.K.at(i, j, 1, 1) != 0.0;
            }
        CHECK(zero);
        CHECK(diag);
    }
}
}
