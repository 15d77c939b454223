#include <doctest.h>

#include <cmath>
#include <random>

#include "certjulia/oracles.hpp"
#include "support.hpp"

using namespace certjulia;
using test::D;
using test::Q;

TEST_CASE("circle distances")
{
    auto d = exact_dist_circle(ComplexDyadic(0));
    CHECK(d.lo == Dyadic(1));
    CHECK(d.hi == Dyadic(1));
    d = exact_dist_circle(ComplexDyadic(2));
    CHECK(d.lo == Dyadic(1));
    CHECK(d.hi == Dyadic(1));
    // 0.6 + 0.8i rounded to doubles
    d = exact_dist_circle(ComplexDyadic(Dyadic::from_double(0.6), Dyadic::from_double(0.8)));
    CHECK(d.hi < Dyadic::pow2(-50));
    d = exact_dist_circle(ComplexDyadic(D("0.6015625"), D("0.798828125")));
    CHECK(d.hi - d.lo <= Dyadic::pow2(-64));
}

TEST_CASE("segment distances")
{
    CHECK(exact_dist_segment(ComplexDyadic(3)).lo == Dyadic(1));
    CHECK(exact_dist_segment(ComplexDyadic(0, 1)).hi == Dyadic(1));
    CHECK(exact_dist_segment(ComplexDyadic(1)).hi.is_zero());
    const auto d = exact_dist_segment(ComplexDyadic(D("-5"), D("4")));
    CHECK(d.lo == Dyadic(5));
    CHECK(d.hi == Dyadic(5));
}

TEST_CASE("oracle self-test against closed-form geometry")
{
    std::mt19937_64 rng(17);
    for (int k = 0; k < 1000; ++k) {
        const ComplexDyadic z(test::random_dyadic(rng, 40, -6, 2), test::random_dyadic(rng, 40, -6, 2));
        for (const auto& b : {exact_dist_circle(z, 64), exact_dist_segment(z, 64)}) {
            CHECK(b.lo <= b.hi);
            CHECK(b.hi - b.lo <= Dyadic::pow2(-64));
        }
        // circle: (1 + lo)^2 <= |z|^2 <= (1 + hi)^2 outside, mirrored inside
        const auto c = exact_dist_circle(z, 64);
        const mpq_class n2 = Q(z.norm2());
        if (n2 >= 1) {
            CHECK(Q(Dyadic(1) + c.lo) * Q(Dyadic(1) + c.lo) <= n2);
            CHECK(Q(Dyadic(1) + c.hi) * Q(Dyadic(1) + c.hi) >= n2);
        } else {
            const bool ok = Q(Dyadic(1) - c.hi) <= 0 || Q(Dyadic(1) - c.hi) * Q(Dyadic(1) - c.hi) <= n2;
            CHECK(ok);
            CHECK(Q(Dyadic(1) - c.lo) * Q(Dyadic(1) - c.lo) >= n2);
        }
        const double ds = dist_segment(z.re.to_double(), z.im.to_double());
        const auto s = exact_dist_segment(z, 64);
        CHECK(std::fabs(ds - s.lo.to_double()) <= 1e-12 * (1 + ds));
    }
}

TEST_CASE("inverse iteration clouds")
{
    const MapSpec z2 = MapSpec::load(test::data("z2.json"));
    const Cloud c = inverse_iteration_cloud(z2, 30, {1.0, 0.0}, 10000, 1);
    CHECK(c.points.size() == 10000);
    CHECK(c.depth == 30);
    for (const auto& p : c.points) {
        CHECK(dist_circle(p.real(), p.imag()) < std::ldexp(1.0, -20));
    }
    const MapSpec s = MapSpec::load(test::data("z2m2.json"));
    const Cloud cs = inverse_iteration_cloud(s, 20, {2.0, 0.0}, 2000, 3);
    for (const auto& p : cs.points) {
        CHECK(dist_segment(p.real(), p.imag()) < std::ldexp(1.0, -10));
    }
    const Cloud zero = inverse_iteration_cloud(z2, 0, {1.0, 0.0}, 50, 1);
    REQUIRE(zero.points.size() == 1);
    CHECK(zero.points[0] == std::complex<double>(1.0, 0.0));
}

TEST_CASE("conformance harness")
{
    const MapSpec m = MapSpec::load(test::data("z2.json"));
    const Certificate cert = Certificate::load(test::data("circle.cert.json"));
    const Decider dec(cert, m);

    SampleSpec none;
    none.per_n = 0;
    const ConformanceReport empty = conformance_check(dec, circle_oracle(), {8, 9}, none);
    CHECK(empty.pass());
    CHECK(empty.total_samples == 0);
    for (const auto& row : empty.rows) {
        CHECK(row.samples == 0);
    }

    SampleSpec few;
    few.per_n = 500;
    few.threads = 2;
    const ConformanceReport ok = conformance_check(dec, circle_oracle(), {8, 12}, few);
    CHECK(ok.pass());
    CHECK(ok.total_samples == 1000);
    CHECK(ok.summary().rfind("PASS", 0) == 0);
}

TEST_CASE("synthetic oracle flags exactly the planted violations")
{
    const MapSpec m = MapSpec::load(test::data("z2.json"));
    const Certificate cert = Certificate::load(test::data("circle.cert.json"));
    const Decider dec(cert, m);
    // claims every point is far from J except the listed ones
    const std::vector<ComplexDyadic> on = {ComplexDyadic(1), ComplexDyadic(-1), ComplexDyadic(0, 1)};
    DistanceOracle synthetic;
    synthetic.map_id = "synthetic";
    synthetic.exact_dist = [&](const ComplexDyadic& z, long) {
        for (const auto& p : on) {
            if (p == z) {
                return OracleBracket{Dyadic(), Dyadic()};
            }
        }
        return OracleBracket{Dyadic::pow2(30), Dyadic::pow2(30)};
    };
    SampleSpec spec;
    // the first two are answered 0 although the oracle calls them far
    spec.points = {ComplexDyadic(Dyadic(1) + Dyadic::pow2(-30)), ComplexDyadic(0, Dyadic(-1) - Dyadic::pow2(-30)),
                   ComplexDyadic(1), ComplexDyadic(3), ComplexDyadic(0, 1)};
    const ConformanceReport rep = conformance_check(dec, synthetic, {10}, spec);
    CHECK(rep.total_samples == 5);
    CHECK(rep.total_violations == 2);
    CHECK_FALSE(rep.pass());
    REQUIRE(rep.violations.size() == 2);
    CHECK(rep.violations[0].z == spec.points[0]);
    CHECK(rep.violations[1].z == spec.points[1]);
}
