#include <cmath>
#include <set>

#include "doctest.h"
#include "mfhawkes/random.hpp"
#include "mfhawkes/stats.hpp"
#include "support.hpp"

using namespace mfh;

TEST_SUITE("random")
{
TEST_CASE("philox known-answer vectors")
{
    using C = Philox4x32::Counter;
    using K = Philox4x32::Key;
    CHECK(Philox4x32::block(C{0, 0, 0, 0}, K{0, 0})
          == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox4x32::block(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                            K{0xffffffff, 0xffffffff})
          == C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox4x32::block(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                            K{0xa4093822, 0x299f31d0})
          == C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct")
{
    auto const p = test::seed(42);
    RandomStream a(p, StreamPurpose::poisson_measure, 3, 7, 1);
    RandomStream b(p, StreamPurpose::poisson_measure, 3, 7, 1);
    for (int i = 0; i < 100; ++i)
        CHECK(a.uniform() == b.uniform());

    std::set<double> firsts;
    for (std::uint32_t unit = 0; unit < 4; ++unit)
        for (std::uint32_t sub = 0; sub < 4; ++sub)
            for (std::uint64_t rep = 0; rep < 4; ++rep)
            {
                RandomStream s(p, StreamPurpose::poisson_measure, rep, unit, sub);
                firsts.insert(s.uniform());
            }
    CHECK(firsts.size() == 64);

    RandomStream c(p, StreamPurpose::limit_noise, 3, 7, 1);
    RandomStream d(p.reseeded(1), StreamPurpose::poisson_measure, 3, 7, 1);
    RandomStream e(p, StreamPurpose::poisson_measure, 3, 7, 1);
    double const x = e.uniform();
    CHECK(c.uniform() != x);
    CHECK(d.uniform() != x);
}

TEST_CASE("uniform pairs consume one block")
{
    RandomStream s(test::seed(1), StreamPurpose::aux, 0, 0);
    CHECK(s.position() == 0);
    auto const pr = s.uniform_pair();
    CHECK(s.position() == 1);
    RandomStream t(test::seed(1), StreamPurpose::aux, 0, 0);
    CHECK(t.uniform() == pr[0]);
    CHECK(t.uniform() == pr[1]);
    CHECK(t.position() == 1);
}

TEST_CASE("uniform and normal moments")
{
    RandomStream s(test::seed(9), StreamPurpose::aux, 0, 0);
    std::size_t const n = 200000;
    std::vector<double> u(n), z(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        u[i] = s.uniform();
        REQUIRE(u[i] > 0);
        REQUIRE(u[i] < 1);
    }
    for (auto& v : z)
        v = s.normal();
    auto const su = summarize(u);
    auto const sz = summarize(z);
    CHECK(std::abs(su.mean - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
    CHECK(std::abs(sz.mean) < 4 / std::sqrt(double(n)));
    CHECK(std::abs(sz.variance - 1) < 4 * std::sqrt(2.0 / n));
}

TEST_CASE("normal quantile")
{
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-13));
    CHECK(normal_quantile(0.001) == doctest::Approx(-3.090232306167813).epsilon(1e-13));
}
}
