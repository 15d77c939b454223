// z^2 + i has no closed-form distance to J; its certificate is checked by
// properties that hold without an oracle.
#include <cmath>
#include <random>

#include <doctest.h>

#include "certjulia/decider.hpp"
#include "certjulia/oracles.hpp"
#include "support.hpp"

using namespace certjulia;

namespace {

struct Dendrite {
    MapSpec map = MapSpec::load(test::data("z2i.json"));
    Certificate cert = Certificate::load(test::data("dendrite.cert.json"));
    Decider dec{cert, map};
    // repelling fixed point (1 + sqrt(1 - 4i)) / 2
    std::complex<double> beta{1.3002425902201205, -0.6248105338438266};
};

const Dendrite& dendrite()
{
    static const Dendrite d;
    return d;
}

} // namespace

TEST_CASE("dendrite certificate validates")
{
    const Dendrite& d = dendrite();
    const ValidationReport rep = validate(d.cert, d.map);
    INFO(rep.to_text());
    CHECK(rep.overall());
    CHECK(d.cert.julia_approx.contains(ComplexDyadic()));
}

TEST_CASE("backward orbit points are answered close at every level")
{
    const Dendrite& d = dendrite();
    const Cloud cl = inverse_iteration_cloud(d.map, 40, d.beta, 400, 3);
    int far = 0;
    int outside_u = 0;
    for (const auto& p : cl.points) {
        const ComplexDyadic z(Dyadic::from_double(p.real()), Dyadic::from_double(p.imag()));
        outside_u += !d.cert.U.contains(z);
        for (int n = d.dec.n0(); n <= 14; ++n) {
            far += d.dec.decide(n, z).bit;
        }
    }
    CHECK(outside_u == 0);
    CHECK(far == 0);
}

TEST_CASE("pixels filled at n + 1 stay filled at n")
{
    // fill at n + 1 means d <= 2^-n-2, which forces fill at n
    const Dendrite& d = dendrite();
    const Cloud cl = inverse_iteration_cloud(d.map, 40, d.beta, 150, 4);
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> jitter(-3, 3);
    const int n = 9;
    const double delta = std::ldexp(1.0, -n - 2);
    int filled_fine = 0;
    int broken = 0;
    for (const auto& p : cl.points) {
        const double x = (std::round(p.real() / delta) + jitter(rng)) * delta;
        const double y = (std::round(p.imag() / delta) + jitter(rng)) * delta;
        const ComplexDyadic z(Dyadic::from_double(x), Dyadic::from_double(y));
        const int fine = d.dec.pixel_value(n + 1, z);
        const int coarse = d.dec.pixel_value(n, z);
        filled_fine += fine;
        broken += fine == 1 && coarse == 0;
    }
    CHECK(filled_fine > 0);
    CHECK(broken == 0);
}
