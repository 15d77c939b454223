#include <doctest.h>

#include <random>

#include "certjulia/ball.hpp"
#include "certjulia/error.hpp"
#include "support.hpp"

using namespace certjulia;
using test::D;
using test::Q;

TEST_CASE("ball_mul scales a disk")
{
    const Ball a(ComplexDyadic{D("1"), D("0")}, D("0.125"));
    const Ball b(ComplexDyadic{D("2"), D("0")});
    const Ball c = ball_mul(a, b, 64);
    CHECK(c.center == ComplexDyadic(D("2")));
    CHECK(c.radius >= D("0.25"));
}

TEST_CASE("ball_mul with an exact zero")
{
    const Ball a(ComplexDyadic{D("0")});
    const Ball b(ComplexDyadic{D("3"), D("-7")}, D("0.5"));
    const Ball c = ball_mul(a, b, 64);
    CHECK(c.contains(ComplexDyadic()));
    CHECK(c.center == ComplexDyadic());
}

TEST_CASE("ball_abs_bounds")
{
    const AbsBounds a = ball_abs_bounds(Ball(ComplexDyadic{D("3"), D("4")}), 64);
    CHECK(a.lo <= Dyadic(5));
    CHECK(a.hi >= Dyadic(5));
    CHECK(a.hi - a.lo <= Dyadic::pow2(-63));

    const AbsBounds b = ball_abs_bounds(Ball(ComplexDyadic{D("0")}, D("1")), 64);
    CHECK(b.lo.is_zero());
    CHECK(b.hi >= Dyadic(1));

    const AbsBounds c = ball_abs_bounds(Ball(ComplexDyadic{D("1"), D("1")}, D("0.25")), 64);
    const Dyadic s2_lo = Dyadic::sqrt(2, 100, Round::kDown);
    const Dyadic s2_hi = Dyadic::sqrt(2, 100, Round::kUp);
    CHECK(c.lo <= s2_lo - D("0.25"));
    CHECK(c.hi >= s2_hi + D("0.25"));
}

TEST_CASE("round_ball")
{
    const Ball a(ComplexDyadic{D("0.75"), D("-0.125")}, D("0.5"));
    CHECK(round_ball(a, 8).center == a.center);
    CHECK(round_ball(a, 8).radius == a.radius);

    const Dyadic third = Dyadic::div(1, 3, 64, Round::kNearest);
    const Ball t = round_ball(Ball(ComplexDyadic{third}), 8);
    CHECK(t.radius <= Dyadic::pow2(-8));
    CHECK(t.contains(ComplexDyadic(third)));

    std::mt19937_64 rng(5);
    for (int k = 0; k < 200; ++k) {
        const Ball x(ComplexDyadic{test::random_dyadic(rng, 64, -40, 2), test::random_dyadic(rng, 64, -40, 2)},
                     test::random_dyadic(rng, 16, -30, -10).abs());
        CHECK(round_ball(round_ball(x, 16), 8).contains(x));
    }
}

TEST_CASE("ball_inv rejects balls around zero")
{
    CHECK_THROWS_AS(ball_inv(Ball(ComplexDyadic{D("0.25")}, D("0.5")), 64), DenominatorVanishes);
    const Ball inv = ball_inv(Ball(ComplexDyadic{D("2")}), 64);
    CHECK(inv.contains(ComplexDyadic(D("0.5"))));
}

TEST_CASE("containment under random inputs")
{
    std::mt19937_64 rng(99);
    for (int k = 0; k < 500; ++k) {
        const Ball a(ComplexDyadic{test::random_dyadic(rng, 64, -10, 3), test::random_dyadic(rng, 64, -10, 3)},
                     test::random_dyadic(rng, 20, -30, -4).abs());
        const Ball b(ComplexDyadic{test::random_dyadic(rng, 64, -10, 3), test::random_dyadic(rng, 64, -10, 3)},
                     test::random_dyadic(rng, 20, -30, -4).abs());
        const ComplexDyadic x = test::point_in(a, rng);
        const ComplexDyadic y = test::point_in(b, rng);
        const auto s = x + y;
        CHECK(test::ball_holds(ball_add(a, b, 40), Q(s.re), Q(s.im)));
        const auto p = x * y;
        CHECK(test::ball_holds(ball_mul(a, b, 40), Q(p.re), Q(p.im)));
    }
}

TEST_CASE("monotone in working precision")
{
    const Ball a(ComplexDyadic{Dyadic::div(1, 3, 200, Round::kNearest), Dyadic::div(2, 7, 200, Round::kNearest)});
    const Ball lo = ball_mul(a, a, 32);
    const Ball hi = ball_mul(a, a, 96);
    CHECK(hi.radius <= lo.radius);
}

TEST_CASE("coefficient oracles")
{
    CoefficientOracle::reset_ticks();
    const CoefficientOracle tenth = CoefficientOracle::decimal("0.1", "-0.3");
    CHECK_FALSE(tenth.is_exact());
    for (unsigned bits : {8u, 30u, 100u}) {
        const ComplexDyadic q = tenth.query(bits);
        const mpq_class dx = Q(q.re) - mpq_class(1, 10);
        const mpq_class dy = Q(q.im) + mpq_class(3, 10);
        mpq_class bound(1);
        mpq_div_2exp(bound.get_mpq_t(), bound.get_mpq_t(), bits);
        CHECK(dx * dx + dy * dy < bound * bound);
    }
    CHECK(CoefficientOracle::ticks() == 8 + 30 + 100);
    CHECK(test::ball_holds(tenth.ball(20), mpq_class(1, 10), mpq_class(-3, 10)));

    const CoefficientOracle half = CoefficientOracle::decimal("0.5", "0");
    CHECK(half.is_exact());
    CHECK(half.ball(10).radius.is_zero());
    const CoefficientOracle third = CoefficientOracle::rational(mpq_class(1, 3), mpq_class(0));
    CHECK(test::ball_holds(third.ball(40), mpq_class(1, 3), mpq_class(0)));
}
