#include <doctest.h>

#include "certjulia/certificate.hpp"
#include "certjulia/error.hpp"
#include "certjulia/map.hpp"
#include "support.hpp"

using namespace certjulia;
using test::D;
using test::Q;

namespace {

Certificate constants(const char* lambda, const char* K1, const char* K2, const char* C)
{
    Certificate c;
    c.lambda.value = D(lambda);
    c.K1.value = D(K1);
    c.K2.value = D(K2);
    c.C.value = D(C);
    return c;
}

} // namespace

TEST_CASE("L_of")
{
    CHECK(L_of(D("0.5"), 7) == 9);
    CHECK(L_of(D("0.25"), 7) == 5);
    CHECK(L_of(D("0.75"), 3) == 11);
    CHECK_THROWS_AS(L_of(Dyadic(1), 3), InvalidConstants);
}

TEST_CASE("threshold")
{
    CHECK(threshold(Dyadic(1), Dyadic(2), 4, 7) == Dyadic(1025));
    for (int i = 1; i < 20; ++i) {
        CHECK(threshold(Dyadic(1), Dyadic(1), i, 0) == Dyadic(3));
    }
    CHECK(threshold(D("0.5"), Dyadic(4), 9, 3) == Dyadic(513));
    // C^sqrt(2) is irrational: an upper bound
    CHECK(Q(threshold(Dyadic(1), Dyadic(2), 2, 0)) >= mpq_class(63302, 10000));
    CHECK(Q(threshold(Dyadic(1), Dyadic(2), 2, 0)) <= mpq_class(63303, 10000));
}

TEST_CASE("gap_K")
{
    const Certificate c = constants("0.5", "0.25", "1", "2");
    const Dyadic g = gap_K(c, 7);
    CHECK(test::Q(g) <= mpq_class(1, 36));
    CHECK(test::Q(g) > mpq_class(1, 40));

    const Certificate flat = constants("0.5", "1", "1", "1");
    for (int n = 0; n < 30; n += 7) {
        CHECK(gap_K(flat, n) == D("0.5"));
    }
    const Certificate grow = constants("0.75", "0.125", "1", "1.5");
    for (int n = 0; n < 40; ++n) {
        CHECK(gap_K(grow, n + 1) <= gap_K(grow, n));
    }
}

TEST_CASE("derive_alpha_beta")
{
    AlphaBeta ab = derive_alpha_beta(D("0.5"), Dyadic(1), Dyadic(4));
    CHECK(ab.beta == D("0.5"));
    CHECK(ab.alpha == Dyadic(2));

    ab = derive_alpha_beta(D("0.5"), D("0.5"), Dyadic(4));
    CHECK(ab.beta == D("0.5"));
    const Dyadic s8 = Dyadic::sqrt(8, 80, Round::kUp);
    CHECK(ab.alpha >= Dyadic::sqrt(8, 80, Round::kDown));
    CHECK(ab.alpha <= s8 + Dyadic::pow2(-50));

    ab = derive_alpha_beta(D("0.5"), D("0.25"), Dyadic(2));
    CHECK(ab.beta == Dyadic(1));

    // irrational beta is rounded down
    ab = derive_alpha_beta(D("0.5"), D("0.25"), Dyadic(3));
    CHECK(Q(ab.beta) < mpq_class("6309297536/10000000000"));
    CHECK(Q(ab.beta) > mpq_class("6309297535/10000000000"));
    CHECK_THROWS_AS(derive_alpha_beta(D("0.5"), D("0.25"), Dyadic(1)), InvalidConstants);
}

TEST_CASE("derive_K1")
{
    CHECK(derive_K1(Dyadic::pow2(-5)) == Dyadic::pow2(-7));
    CHECK(derive_K1(D("0.375")) == D("0.09375"));
    CHECK_THROWS_AS(derive_K1(Dyadic()), InvalidConstants);
}

TEST_CASE("acceptance certificates validate")
{
    for (const auto& [map, cert] : {std::pair{"z2.json", "circle.cert.json"}, std::pair{"z2m2.json", "segment.cert.json"}}) {
        const MapSpec m = MapSpec::load(test::data(map));
        const Certificate c = Certificate::load(test::data(cert));
        const ValidationReport rep = validate(c, m);
        INFO(rep.to_text());
        CHECK(rep.overall());
        CHECK(c.K1.value == c.eps.value.mul_2exp(-2));
    }
}

TEST_CASE("validate rejects bad constants")
{
    const MapSpec m = MapSpec::load(test::data("z2.json"));
    Certificate c = Certificate::load(test::data("circle.cert.json"));
    Certificate one = c;
    one.lambda.value = Dyadic(1);
    const ValidationReport a = validate(one, m);
    CHECK_FALSE(a.overall());
    REQUIRE(a.find("lambda range") != nullptr);
    CHECK_FALSE(a.find("lambda range")->pass);

    Certificate wide = c;
    wide.eps.value = wide.r.value;
    wide.K1.value = derive_K1(wide.eps.value);
    CHECK_FALSE(validate(wide, m).overall());
}

TEST_CASE("sampled orbits refute an undersized K2")
{
    const MapSpec m = MapSpec::load(test::data("z2.json"));
    const Certificate c = Certificate::load(test::data("circle.cert.json"));
    CHECK(falsify_distortion(c, m, 4000).overall());
    Certificate small = c;
    small.K2.value = c.K2.value.mul_2exp(-3);
    const ValidationReport rep = falsify_distortion(small, m, 4000);
    INFO(rep.to_text());
    CHECK_FALSE(rep.overall());
}

TEST_CASE("certificate JSON round-trip")
{
    const Certificate c = Certificate::load(test::data("segment.cert.json"));
    const Certificate back = Certificate::from_json(c.to_json(true));
    CHECK(back.lambda.value == c.lambda.value);
    CHECK(back.K2.value == c.K2.value);
    CHECK(back.K2.provenance == c.K2.provenance);
    CHECK(back.alpha.value == c.alpha.value);
    CHECK(back.U == c.U);
    CHECK(back.julia_approx == c.julia_approx);
    CHECK(back.to_json(true) == c.to_json(true));
    CHECK(c.n0() == 8);
    CHECK_THROWS_AS(Certificate::from_json("{}"), ParseError);
}

TEST_CASE("estimate_K2_C")
{
    const MapSpec m = MapSpec::load(test::data("z2.json"));
    const Certificate c = Certificate::load(test::data("circle.cert.json"));
    CHECK_THROWS_AS(estimate_K2_C(m, c, 0), InsufficientSamples);
    EstimateOptions opt;
    opt.distance = [](double x, double y) { return std::fabs(std::hypot(x, y) - 1); };
    const K2CEstimate est = estimate_K2_C(m, c, 4000, opt);
    CHECK(est.provenance == Provenance::kHeuristic);
    CHECK(est.C <= D("1.25"));
    CHECK(est.K2 <= Dyadic(4));
    CHECK(est.K2 > Dyadic());
    // the closed-form bound in the certificate dominates the fitted one
    CHECK(est.K2 <= c.K2.value * Dyadic(est.C == Dyadic(1) ? 2 : 4));

    const MapSpec s = MapSpec::load(test::data("z2m2.json"));
    const Certificate sc = Certificate::load(test::data("segment.cert.json"));
    const K2CEstimate se = estimate_K2_C(s, sc, 4000);
    CHECK(se.C >= Dyadic(1));
    CHECK(se.exits > 100);
}
