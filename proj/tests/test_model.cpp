#include <cmath>

#include "doctest.h"
#include "mfhawkes/expression.hpp"
#include "mfhawkes/model.hpp"
#include "mfhawkes/random.hpp"
#include "support.hpp"

using namespace mfh;

namespace
{
double central(RealFunction const& f, double x)
{
    double const h = 1e-5 * std::max(1.0, std::abs(x));
    return (f(x + h) - f(x - h)) / (2 * h);
}

//! Plain bisection on [a, b], independent of the library scan
double bisect(std::function<double(double)> const& g, double a, double b)
{
    double ga = g(a);
    for (int i = 0; i < 200; ++i)
    {
        double const m = 0.5 * (a + b);
        double const gm = g(m);
        if ((gm < 0) == (ga < 0))
        {
            a = m;
            ga = gm;
        }
        else
            b = m;
    }
    return 0.5 * (a + b);
}
}  // namespace

TEST_SUITE("model")
{
TEST_CASE("time grid")
{
    TimeGrid const g(10.0, 1000);
    CHECK(g.size() == 1001);
    CHECK(g.dt() == doctest::Approx(0.01));
    CHECK(g.time(0) == 0.0);
    CHECK(g.time(1000) == 10.0);
    for (std::size_t k = 1; k < g.size(); ++k)
        REQUIRE(g.time(k) > g.time(k - 1));
    CHECK_THROWS_AS(TimeGrid(0.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid(1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid(1.0, kMaxSteps + 1), std::invalid_argument);
}

TEST_CASE("grid function interpolation")
{
    TimeGrid const g(1.0, 4);
    GridFunction f(g, {0.0, 1.0, 2.0, 3.0, 4.0});
    CHECK(f.at(0.125) == doctest::Approx(0.5));
    CHECK(f.at(1.0) == 4.0);
    CHECK(f.at(2.0) == 4.0);
    CHECK(f.sup_norm() == 4.0);
    CHECK_THROWS(GridFunction(g, {1.0, 2.0}));
}

TEST_CASE("expression parser")
{
    Expression e("1/(1+exp(-g*(x-0.5)))", "x", {{"g", 2.0}});
    CHECK(e(0.5) == doctest::Approx(0.5));
    CHECK(Expression("-x^2", "x")(3.0) == doctest::Approx(-9.0));
    CHECK(Expression("2^3^2", "x")(0.0) == doctest::Approx(512.0));
    CHECK(Expression("max(x, 1) + min(2, x) * pow(x, 2)", "x")(3.0)
          == doctest::Approx(21.0));
    CHECK(Expression("b^2*t*exp(-b*t)", "t", {{"b", 2.0}})(0.5)
          == doctest::Approx(4 * 0.5 * std::exp(-1.0)));
    CHECK(Expression("sqrt(abs(x)) + tanh(0) + cos(0) + log(exp(1)) + pi - pi", "x")(
              -4.0)
          == doctest::Approx(4.0));
    CHECK_THROWS(Expression("1 +", "x"));
    CHECK_THROWS(Expression("foo(x)", "x"));
    CHECK_THROWS(Expression("y + 1", "x"));
}

TEST_CASE("sigmoid family constants")
{
    auto const s = test::sigmoid(2.0, 2.0);
    CHECK(s.f(0.5) == 0.5);
    CHECK(s.lip_f() == 0.5);
    CHECK(s.sup_f_prime() == 0.5);
    CHECK(s.h(0.0) == 0.0);
    CHECK(s.kernel.total_mass() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(test::sigmoid(2.0, 7.0).kernel.total_mass()
          == doctest::Approx(1.0).epsilon(1e-10));
    CHECK_THROWS_AS(test::sigmoid(-1.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(test::sigmoid(2.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(builtin_model("nope", std::vector<double>{1.0}),
                    std::invalid_argument);
}

TEST_CASE("constant family decouples")
{
    auto const c = test::constant(1.0);
    for (double x : {-3.0, 0.0, 7.0})
    {
        CHECK(c.f(x) == 1.0);
        CHECK(c.f_prime(x) == 0.0);
    }
    CHECK_THROWS_AS(test::constant(-1.0), std::invalid_argument);
}

TEST_CASE("builtin derivatives match finite differences")
{
    RandomStream rng(test::seed(5), StreamPurpose::aux, 0, 0);
    for (auto const& spec :
         {test::sigmoid(2.0, 2.0), test::sigmoid(5.0, 4.0), test::linear_toy(0.5, 0.3)})
    {
        for (int i = 0; i < 100; ++i)
        {
            double const x = -5 + 10 * rng.uniform();
            double const fd = central(spec.rate.f, x);
            double const exact = spec.f_prime(x);
            CHECK(std::abs(fd - exact) <= 1e-6 * std::max(std::abs(exact), 1e-3));
            double const t = 10 * rng.uniform();
            double const hd = central(spec.kernel.h, t);
            double const he = spec.h_prime(t);
            CHECK(std::abs(hd - he) <= 1e-6 * std::max(std::abs(he), 1e-3));
        }
    }
}

TEST_CASE("erlang norms")
{
    auto const k = MemoryKernel::erlang(2.0);
    auto const n = k.norms(10.0);
    // h peaks at 1/beta with value beta/e; h' peaks at 0 with value beta^2
    CHECK(n.sup_h == doctest::Approx(2.0 / std::exp(1.0)).epsilon(1e-12));
    CHECK(n.sup_h_prime == doctest::Approx(4.0));
    // int |h'| = 2 h(1/beta) - h(T)
    CHECK(n.l1_h_prime
          == doctest::Approx(2 * 2.0 / std::exp(1.0) - k.h(10.0)).epsilon(1e-10));
}

TEST_CASE("validate_model spot checks")
{
    CHECK_NOTHROW(validate_model(test::sigmoid(2.0, 2.0)));
    auto bad = test::sigmoid(2.0, 2.0);
    bad.rate.lip_f = 0.1;
    bad.rate.sup_f_prime = 0.1;
    CHECK_THROWS_AS(validate_model(bad), std::invalid_argument);
    auto negative = test::sigmoid(2.0, 2.0);
    negative.rate.f = [](double x) { return x; };
    CHECK_THROWS_AS(validate_model(negative), std::invalid_argument);
}

TEST_CASE("user model from expressions")
{
    UserModelInput in;
    in.f = "1/(1+exp(-g*(x-0.5)))";
    in.h = "b^2*t*exp(-b*t)";
    in.constants = {{"g", 2.0}, {"b", 2.0}};
    auto const spec = user_model(in);
    auto const ref = test::sigmoid(2.0, 2.0);
    for (double x : {-2.0, 0.1, 0.5, 3.0})
    {
        CHECK(spec.f(x) == doctest::Approx(ref.f(x)).epsilon(1e-14));
        CHECK(spec.f_prime(x) == doctest::Approx(ref.f_prime(x)).epsilon(1e-8));
    }
    for (double t : {0.1, 1.0, 4.0})
        CHECK(spec.h_prime(t) == doctest::Approx(ref.h_prime(t)).epsilon(1e-7));
    // probed constants carry the 10% margin
    CHECK(spec.lip_f() == doctest::Approx(1.1 * 0.5).epsilon(1e-5));
    CHECK(spec.rate.constants_estimated);
    CHECK_NOTHROW(validate_model(spec));

    in.h = "t + 1";
    CHECK_THROWS_AS(user_model(in), std::invalid_argument);
}

TEST_CASE("fixed points and stability")
{
    auto const stable = fixed_points(test::sigmoid(2.0, 2.0), 1e-12);
    REQUIRE(stable.size() == 1);
    CHECK(stable[0].x == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(stable[0].slope == doctest::Approx(0.5));
    CHECK(stable[0].stable);

    auto const critical = fixed_points(test::sigmoid(4.0, 2.0), 1e-12);
    REQUIRE(critical.size() == 1);
    CHECK(critical[0].slope == doctest::Approx(1.0));
    CHECK_FALSE(critical[0].stable);

    auto const spec = test::sigmoid(5.0, 4.0);
    auto const three = fixed_points(spec, 1e-12);
    REQUIRE(three.size() == 3);
    auto g = [&](double x) { return spec.f(x) - x; };
    double const lo = bisect(g, 0.0, 0.4), hi = bisect(g, 0.6, 1.0);
    // frozen from a 30-digit root solve
    CHECK(lo == doctest::Approx(0.144794108256064814).epsilon(1e-12));
    CHECK(hi == doctest::Approx(0.855205891743935186).epsilon(1e-12));
    CHECK(three[0].x == doctest::Approx(lo).epsilon(1e-10));
    CHECK(three[1].x == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(three[2].x == doctest::Approx(hi).epsilon(1e-10));
    CHECK(three[0].stable);
    CHECK_FALSE(three[1].stable);
    CHECK(three[2].stable);
    CHECK(three[0].slope == doctest::Approx(0.619143872351978987).epsilon(1e-9));

    CHECK_THROWS_AS(fixed_points(spec, 1e-12, 0.2, 0.4), std::invalid_argument);
    CHECK_THROWS_AS(fixed_points(test::linear_toy(0.5, 0.5), 1e-12),
                    std::invalid_argument);
}

TEST_CASE("multi-class sizes")
{
    auto mc = MultiClassSpec::from_scalar(test::sigmoid(2.0, 2.0));
    CHECK(mc.sizes(37) == std::vector<std::size_t>{37});
    auto const s = test::sigmoid(2.0, 2.0);
    mc.rates = {s.rate, s.rate, s.rate};
    mc.kernels.assign(9, s.kernel);
    mc.proportions = {0.5, 0.3, 0.2};
    auto const sz = mc.sizes(101);
    CHECK(sz == std::vector<std::size_t>{50, 30, 21});
    CHECK_THROWS(mc.sizes(2));
    mc.proportions = {0.5, 0.3, 0.3};
    CHECK_THROWS(mc.validate());
}

TEST_CASE("event paths")
{
    TimeGrid const g(1.0, 10);
    EventPaths e(g, 2);
    e.times[0] = {0.1, 0.5};
    e.times[1] = {0.3};
    CHECK(e.total_events() == 3);
    CHECK(e.count_at(0, 0.5) == 2);
    CHECK(e.count_at(0, 0.49) == 1);
    CHECK(e.merged_times() == std::vector<double>{0.1, 0.3, 0.5});
    auto const agg = e.aggregate_counts();
    CHECK(agg[0] == 0);
    CHECK(agg[3] == 2);
    CHECK(agg[10] == 3);
    CHECK_NOTHROW(e.validate());
    e.times[1] = {0.5};
    CHECK_THROWS_AS(e.validate(), std::logic_error);
    e.times[1] = {0.4, 0.2};
    CHECK_THROWS_AS(e.validate(), std::logic_error);

    std::vector<double> a{0.1, 0.2, 0.3}, b{0.25};
    CHECK(counting_distance(a, b) == 2.0);
    CHECK(counting_distance(a, a) == 0.0);
}
}
