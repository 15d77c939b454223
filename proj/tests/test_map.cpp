#include <doctest.h>

#include <cmath>

#include "certjulia/cover.hpp"
#include "certjulia/error.hpp"
#include "certjulia/map.hpp"
#include "support.hpp"

using namespace certjulia;
using test::D;

namespace {

MapSpec z2()
{
    return MapSpec::polynomial({ComplexDyadic(), ComplexDyadic(), ComplexDyadic(1)}, "z^2");
}

MapSpec z2m2()
{
    return MapSpec::polynomial({ComplexDyadic(-2), ComplexDyadic(), ComplexDyadic(1)}, "z^2 - 2");
}

} // namespace

TEST_CASE("evaluation at fixed points")
{
    CHECK(eval_f(z2(), Ball(ComplexDyadic(1)), 64).contains(ComplexDyadic(1)));
    CHECK(eval_df(z2(), Ball(ComplexDyadic(1)), 64).contains(ComplexDyadic(2)));
    CHECK(eval_f(z2m2(), Ball(ComplexDyadic(2)), 64).contains(ComplexDyadic(2)));
}

TEST_CASE("z^2 + i at the origin")
{
    const MapSpec m = MapSpec::polynomial({ComplexDyadic(0, 1), ComplexDyadic(), ComplexDyadic(1)});
    const Ball b = eval_f(m, Ball(ComplexDyadic()), 53);
    CHECK(b.contains(ComplexDyadic(0, 1)));
    CHECK(b.radius <= Dyadic::pow2(-50));
}

TEST_CASE("inexact coefficients are enclosed")
{
    const MapSpec m = MapSpec::from_json(R"({"kind":"polynomial","numerator":[["0.1","0.3"],["0","0"],["1","0"]]})");
    const Ball b = eval_f(m, Ball(ComplexDyadic(1)), 80);
    CHECK(test::ball_holds(b, mpq_class(11, 10), mpq_class(3, 10)));
    CHECK(b.radius <= Dyadic::pow2(-70));
}

TEST_CASE("rational maps")
{
    // f = 1 / z^2
    const MapSpec m = MapSpec::rational({ComplexDyadic(1)}, {ComplexDyadic(), ComplexDyadic(), ComplexDyadic(1)});
    CHECK(eval_f(m, Ball(ComplexDyadic(2)), 64).contains(ComplexDyadic(D("0.25"))));
    CHECK(eval_df(m, Ball(ComplexDyadic(2)), 64).contains(ComplexDyadic(D("-0.25"))));
    CHECK_THROWS_AS(eval_f(m, Ball(ComplexDyadic(), D("0.5")), 64), DenominatorVanishes);
}

TEST_CASE("orbit of the fixed point 2 of z^2 - 2")
{
    const auto orbit = orbit_with_derivative(z2m2(), ComplexDyadic(2), 3, Dyadic::pow2(-20), D("5"));
    REQUIRE(orbit.size() == 3);
    Dyadic expect(4);
    for (const auto& pt : orbit) {
        CHECK(pt.p.contains(ComplexDyadic(2)));
        CHECK(pt.d_lo <= expect);
        CHECK(expect <= pt.d_hi);
        CHECK(pt.d_hi - pt.d_lo <= Dyadic::pow2(-20));
        expect = expect * Dyadic(4);
    }
}

TEST_CASE("orbit of 1 under z^2")
{
    const auto orbit = orbit_with_derivative(z2(), ComplexDyadic(1), 5, Dyadic::pow2(-20), D("3"));
    REQUIRE(orbit.size() == 5);
    for (std::size_t i = 0; i < orbit.size(); ++i) {
        const Dyadic e = Dyadic::pow2(static_cast<long>(i) + 1);
        CHECK(orbit[i].index == static_cast<int>(i) + 1);
        CHECK(orbit[i].d_lo <= e);
        CHECK(e <= orbit[i].d_hi);
    }
}

TEST_CASE("the critical orbit of z^2 - 2")
{
    const auto orbit = orbit_with_derivative(z2m2(), ComplexDyadic(), 3, Dyadic::pow2(-20), D("5"));
    REQUIRE(orbit.size() == 3);
    CHECK(orbit[0].p.contains(ComplexDyadic(-2)));
    CHECK(orbit[1].p.contains(ComplexDyadic(2)));
    CHECK(orbit[2].p.contains(ComplexDyadic(2)));
    for (const auto& pt : orbit) {
        CHECK(pt.d_lo.is_zero());
        CHECK(pt.d_hi <= Dyadic::pow2(-20));
    }
}

TEST_CASE("orbit stop predicate")
{
    const auto orbit = orbit_with_derivative(z2(), ComplexDyadic(D("1.5")), 10, Dyadic::pow2(-10), D("3"),
                                             [](const OrbitPoint& pt) { return pt.p.center.re > Dyadic(4); });
    CHECK(orbit.size() == 2); // 2.25, 5.0625
}

TEST_CASE("sup |f'| on covers")
{
    BoxCover annulus(5);
    for (long iy = -64; iy < 64; ++iy) {
        for (long ix = -64; ix < 64; ++ix) {
            const double x = (ix + 0.5) / 32.0;
            const double y = (iy + 0.5) / 32.0;
            const double r = std::hypot(x, y);
            if (r >= 0.5 - 0.03 && r <= 1.5 + 0.03) {
                annulus.add_box(ix, iy);
            }
        }
    }
    const Dyadic s = sup_df_on_cover(z2(), annulus, Dyadic());
    CHECK(s >= Dyadic(3));
    CHECK(s <= Dyadic(4));

    BoxCover seg(6);
    for (long ix = -128; ix < 128; ++ix) {
        seg.add_box(ix, 0);
        seg.add_box(ix, -1);
    }
    CHECK(sup_df_on_cover(z2m2(), seg, D("0.25")) >= D("4.5"));

    BoxCover one(12);
    one.add_point(ComplexDyadic(1));
    const Dyadic s1 = sup_df_on_cover(z2(), one, Dyadic());
    CHECK(s1 >= Dyadic(2));
    CHECK(s1 <= Dyadic(2) + Dyadic::pow2(-6));
}

TEST_CASE("preimages")
{
    auto pre = preimages(z2(), {1.0, 0.0});
    REQUIRE(pre.size() == 2);
    CHECK(std::abs(pre[0] + pre[1]) < 1e-12);
    CHECK(std::abs(std::abs(pre[0]) - 1.0) < 1e-12);

    // f = (z^2 + 1) / (2z)
    const MapSpec m = MapSpec::rational({ComplexDyadic(1), ComplexDyadic(), ComplexDyadic(1)},
                                        {ComplexDyadic(), ComplexDyadic(2)});
    pre = preimages(m, {2.0, 1.0});
    REQUIRE(pre.size() == 2);
    for (const auto& w : pre) {
        const auto fw = (w * w + 1.0) / (2.0 * w);
        CHECK(std::abs(fw - std::complex<double>(2.0, 1.0)) < 1e-9);
    }
}

TEST_CASE("map files round-trip")
{
    const MapSpec m = MapSpec::from_json(R"({"name":"c","kind":"polynomial","numerator":[["-0.75","0.1"],"0","1"]})");
    const MapSpec back = MapSpec::from_json(m.to_json());
    CHECK(back.to_json() == m.to_json());
    CHECK(back.degree == 2);
    CHECK_THROWS_AS(MapSpec::from_json("{"), ParseError);
    CHECK_THROWS_AS(MapSpec::from_json(R"({"kind":"weird","numerator":["1"]})"), ParseError);
    const MapSpec file = MapSpec::load(test::data("z2m2.json"));
    CHECK(file.numerator.size() == 3);
}
