#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "certjulia/certificate.hpp"
#include "certjulia/decider.hpp"
#include "certjulia/map.hpp"
#include "certjulia/oracles.hpp"
#include "support.hpp"

using namespace certjulia;
using test::D;

namespace {

struct Fixture {
    MapSpec map;
    Certificate cert;
    Fixture(const char* m, const char* c) : map(MapSpec::load(test::data(m))), cert(Certificate::load(test::data(c))) {}
};

const Fixture& circle()
{
    static const Fixture f("z2.json", "circle.cert.json");
    return f;
}

const Fixture& segment()
{
    static const Fixture f("z2m2.json", "segment.cert.json");
    return f;
}

} // namespace

TEST_CASE("subprogram on the circle")
{
    const Decider dec(circle().cert, circle().map);
    CHECK(dec.n0() == 6);
    CHECK(dec.subprogram(10, ComplexDyadic(1)).bit == 0);
    const Verdict far = dec.decide(10, ComplexDyadic(D("1.25")));
    CHECK(far.bit == 1);
    const Dyadic gap = dec.level(10).gap;
    CHECK(gap > Dyadic::pow2(-9));
    const Verdict near = dec.subprogram(10, ComplexDyadic(Dyadic(1) + Dyadic::pow2(-20)));
    CHECK(near.bit == 0);
    CHECK(near.iterations_used <= dec.level(10).L);
}

TEST_CASE("points outside U")
{
    const Decider dec(circle().cert, circle().map);
    const Verdict v = dec.decide(10, ComplexDyadic(3));
    CHECK(v.bit == 1);
    CHECK(v.reason == Reason::kOutsideU);
    CHECK(v.iterations_used == 0);

    // just across the outer edge of U on the positive real axis
    const BoxCover& U = circle().cert.U;
    const long iy = 0;
    const auto& runs = U.row(iy);
    REQUIRE_FALSE(runs.empty());
    const long edge = runs.back().hi + 1;
    const ComplexDyadic z(Dyadic(edge).mul_2exp(-U.resolution()) + Dyadic::pow2(-40), Dyadic::pow2(-U.resolution() - 1));
    REQUIRE_FALSE(U.contains(z));
    for (int n = dec.n0(); n < 30; n += 5) {
        CHECK(dec.decide(n, z).bit == 1);
    }
}

TEST_CASE("pixel values at known points")
{
    const Decider dc(circle().cert, circle().map);
    for (int n = dc.n0(); n <= 16; ++n) {
        CHECK(dc.pixel_value(n, ComplexDyadic(1)) == 1);
        CHECK(dc.pixel_value(n, ComplexDyadic(0)) == 0);
    }
    const Decider ds(segment().cert, segment().map);
    for (int n = 3; n <= 16; ++n) {
        CHECK(ds.pixel_value(n, ComplexDyadic(D("2.5"))) == 0);
        CHECK(ds.pixel_value(n, ComplexDyadic(D("0.5"))) == 1);
    }
}

TEST_CASE("probe brackets the true distance")
{
    const Decider dec(circle().cert, circle().map);
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0, 1);
    for (int k = 0; k < 3000; ++k) {
        const double th = 6.283185307179586 * u(rng);
        const double rho = 1 + (u(rng) - 0.5) * 0.1;
        const double x = rho * std::cos(th);
        const double y = rho * std::sin(th);
        const double d = dist_circle(x, y);
        const DistanceBracket b = dec.probe(x, y, 12);
        CHECK(b.lo <= d * (1 + 1e-12) + 1e-15);
        CHECK(d <= b.hi * (1 + 1e-12) + 1e-15);
    }
}

TEST_CASE("julia-free balls miss the circle")
{
    const Decider dec(circle().cert, circle().map);
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1.6, 1.6);
    int cleared = 0;
    for (int k = 0; k < 3000; ++k) {
        const double x = u(rng);
        const double y = u(rng);
        const double r = std::ldexp(1.0, -static_cast<int>(rng() % 12) - 2);
        if (dec.ball_is_julia_free(x, y, r, 40)) {
            ++cleared;
            CHECK(dist_circle(x, y) > r);
        }
    }
    CHECK(cleared > 500);
}

TEST_CASE("fast path keeps the contract")
{
    for (const Fixture* f : {&circle(), &segment()}) {
        const Decider dec(f->cert, f->map);
        const DistanceOracle o = f == &circle() ? circle_oracle() : segment_oracle();
        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> u(0, 1);
        for (int n : {dec.n0(), 12, 18}) {
            const double t = std::ldexp(1.0, -n - 1);
            const double g = dec.level(n).gap.to_double() * t;
            long agree = 0;
            long total = 0;
            for (int k = 0; k < 1500; ++k) {
                const auto w = o.sample_at(rng, t * 4 * u(rng));
                const ComplexDyadic z(Dyadic::from_double(w.real()), Dyadic::from_double(w.imag()));
                const double d = o.exact_dist(z, 64).lo.to_double();
                const Verdict fast = dec.decide_fast(n, w.real(), w.imag());
                const Verdict slow = dec.decide(n, z);
                if (fast.bit == 0) {
                    CHECK(d <= t * (1 + 1e-9));
                } else {
                    CHECK(d >= g * (1 - 1e-9));
                }
                agree += fast.bit == slow.bit;
                ++total;
            }
            CHECK(agree * 100 >= total * 99);
        }
    }
}

TEST_CASE("literal grid rule agrees at simple pixels")
{
    const Decider dc(circle().cert, circle().map);
    const int n = dc.n0();
    CHECK(dc.pixel_value_grid(n, ComplexDyadic(1)) == 1);
    CHECK(dc.pixel_value_grid(n, ComplexDyadic(0)) == 0);
    const Decider ds(segment().cert, segment().map);
    CHECK(ds.pixel_value_grid(ds.n0(), ComplexDyadic(D("2.5"))) == 0);
}

TEST_CASE("coarse rule")
{
    const Decider dec(circle().cert, circle().map);
    CHECK(dec.coarse_pixel_value(0, ComplexDyadic(0)) == 0);
    CHECK(dec.coarse_pixel_value(2, ComplexDyadic(1)) == 1);
    CHECK_THROWS(dec.coarse_pixel_value(dec.n0(), ComplexDyadic(1)));

    // a fill at n0 implies a fill by the coarse rule one level down
    const int n = dec.n0();
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<long> pick(-300, 300);
    long fills = 0;
    for (int k = 0; k < 4000; ++k) {
        const ComplexDyadic z(Dyadic(pick(rng)).mul_2exp(-n - 2), Dyadic(pick(rng)).mul_2exp(-n - 2));
        if (dec.pixel_value(n, z) == 1) {
            ++fills;
            CHECK(dec.coarse_pixel_value(n - 1, z) == 1);
        }
    }
    CHECK(fills > 0);
}

TEST_CASE("stats conservation")
{
    const Decider dec(segment().cert, segment().map);
    DeciderStats st;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2.2, 2.2);
    for (int k = 0; k < 500; ++k) {
        const ComplexDyadic z(Dyadic::from_double(u(rng)), Dyadic::from_double(u(rng) / 64));
        const Verdict v = dec.decide(12, z, &st);
        CHECK(v.iterations_used <= dec.level(12).L);
    }
    CHECK(st.subprogram_calls == 500);
    CHECK(std::accumulate(st.reasons.begin(), st.reasons.end(), std::uint64_t{0}) == 500);
    std::uint64_t hist = 0;
    for (const auto& [k, v] : st.iterations) {
        hist += v;
    }
    CHECK(hist == 500);
}
