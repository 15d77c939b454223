#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "certjulia/error.hpp"
#include "certjulia/oracles.hpp"
#include "certjulia/render.hpp"
#include "support.hpp"

using namespace certjulia;
using test::D;

namespace {

struct Fixture {
    MapSpec map = MapSpec::load(test::data("z2.json"));
    Certificate cert = Certificate::load(test::data("circle.cert.json"));
};

const Fixture& circle()
{
    static const Fixture f;
    return f;
}

} // namespace

TEST_CASE("grid snapping")
{
    const PixelGrid g = PixelGrid::snap(Region::parse("-1.5,-1.5,1.5,1.5"), 8);
    CHECK(g.i0 == -1536);
    CHECK(g.j0 == -1536);
    CHECK(g.width == 3073);
    CHECK(g.height == 3073);
    CHECK(g.x(1536) == 0.0);
    CHECK(g.center(1536 + 1024, 1536) == ComplexDyadic(1));

    const PixelGrid h = PixelGrid::snap(Region::parse("0.1,0,0.25,0.001"), 2);
    CHECK(h.i0 == 1);
    CHECK(h.x(h.width - 1) >= 0.25);
    CHECK(h.y(h.height - 1) >= 0.001);
    CHECK_THROWS_AS(Region::parse("1,2,3"), ParseError);
}

TEST_CASE("PBM round-trip")
{
    std::mt19937_64 rng(3);
    for (long w : {1L, 7L, 8L, 13L}) {
        Bitmap b(w, 5);
        for (long j = 0; j < 5; ++j) {
            for (long i = 0; i < w; ++i) {
                b.set(i, j, (rng() & 1) != 0);
            }
        }
        const std::string pbm = b.to_pbm({"hello", "world"});
        CHECK(pbm.rfind("P4\n# hello\n# world\n", 0) == 0);
        CHECK(Bitmap::from_pbm(pbm) == b);
    }
    CHECK_THROWS_AS(Bitmap::from_pbm("P1\n1 1\n0"), ParseError);
}

TEST_CASE("escape time baseline")
{
    const MapSpec& m = circle().map;
    CHECK(escape_time(m, 0.5, 0.5, 0) == -1);
    CHECK(escape_time(m, 0.5, 0.5, 0) == -1);
    CHECK(escape_time(m, 3.0, 0.0, 10) == 0);
    CHECK(escape_time(m, 1.01, 0.0, 100) > 0);
    // with no iterations only samples already outside the escape radius count
    CHECK(render_escape_time(m, Region::parse("-1,-1,1,1"), 3, 0).count() == 0);
}

TEST_CASE("escape band contains the certified set")
{
    const Region reg = Region::parse("0,0,1.25,1.25");
    const Decider dec(circle().cert, circle().map);
    const RenderResult cert = render_certified(dec, reg, 8, 1);
    const Bitmap band = render_escape_time(circle().map, reg, 8, 256);
    REQUIRE(cert.image.width() == band.width());
    long filled = 0;
    for (long j = 0; j < band.height(); ++j) {
        for (long i = 0; i < band.width(); ++i) {
            if (cert.image.get(i, j)) {
                ++filled;
                CHECK(band.get(i, j));
            }
        }
    }
    CHECK(filled > 1000);
}

TEST_CASE("distance estimator baseline")
{
    const MapSpec& m = circle().map;
    const DemEstimate on = dem_estimate(m, 1.0, 0.0, 64);
    CHECK_FALSE(on.escaped);
    CHECK(on.estimate < std::ldexp(1.0, -10));
    const DemEstimate zero = dem_estimate(m, 0.0, 0.0, 64);
    CHECK_FALSE(zero.escaped);
    CHECK(zero.estimate >= 1.0);
    const DemEstimate out = dem_estimate(m, 1.5, 0.0, 64);
    CHECK(out.escaped);
    CHECK(std::fabs(out.estimate - 1.5 * std::log(1.5)) < 1e-6);
}

TEST_CASE("distance estimator and certified sets differ by a thin band")
{
    const Region reg = Region::parse("-1.5,-1.5,1.5,1.5");
    const Decider dec(circle().cert, circle().map);
    const RenderResult cert = render_certified(dec, reg, 8, 1);
    const Bitmap dem = render_dem(circle().map, reg, 8, 256);
    const long W = dem.width();
    const long H = dem.height();
    long diff = 0;
    for (long j = 0; j < H; ++j) {
        for (long i = 0; i < W; ++i) {
            if (cert.image.get(i, j) == dem.get(i, j)) {
                continue;
            }
            ++diff;
            bool near_both = false;
            for (long b = -2; b <= 2 && !near_both; ++b) {
                for (long a = -2; a <= 2 && !near_both; ++a) {
                    const long x = i + a;
                    const long y = j + b;
                    near_both = x >= 0 && y >= 0 && x < W && y < H && cert.image.get(x, y) && dem.get(x, y);
                }
            }
            CHECK(near_both);
        }
    }
    MESSAGE("symmetric difference: " << diff << " pixels");
}

TEST_CASE("thread count does not change the image")
{
    const Region reg = Region::parse("-1.25,-1.25,1.25,0.5");
    const Decider dec(circle().cert, circle().map);
    const RenderResult a = render_certified(dec, reg, 7, 1);
    const RenderResult b = render_certified(dec, reg, 7, 3);
    CHECK(a.image.to_pbm() == b.image.to_pbm());
    CHECK(a.stats.decider.probes == b.stats.decider.probes);
    CHECK(a.stats.errors == 0);
}

TEST_CASE("render requests")
{
    RenderRequest rq;
    rq.map_path = test::data("z2.json");
    rq.cert_path = test::data("circle.cert.json");
    rq.region = Region::parse("0.75,-0.25,1.25,0.25");
    rq.n = 7;
    const RenderResult r = render(rq);
    CHECK(r.certified);
    CHECK(r.stats.filled > 0);

    rq.mode = RenderMode::kDem;
    CHECK_FALSE(render(rq).certified);

    const auto dir = std::filesystem::temp_directory_path() / "certjulia_render_test";
    std::filesystem::create_directories(dir);
    Certificate bad = circle().cert;
    bad.U = bad.julia_approx;
    bad.U_file.clear();
    bad.julia_file.clear();
    const std::string path = (dir / "bad.cert.json").string();
    bad.save(path);
    rq.mode = RenderMode::kCertified;
    rq.cert_path = path;
    CHECK_THROWS_AS(render(rq), CertificateInvalid);
    rq.allow_unvalidated = true;
    CHECK_FALSE(render(rq).certified);
    std::filesystem::remove_all(dir);
}

TEST_CASE("scaling benchmark")
{
    const Decider dec(circle().cert, circle().map);
    std::vector<ComplexDyadic> pts;
    for (int k = 0; k < 20; ++k) {
        const double th = 0.3 * k;
        pts.emplace_back(Dyadic::from_double(1.01 * std::cos(th)), Dyadic::from_double(1.01 * std::sin(th)));
    }
    const ScalingTable t = benchmark_scaling(dec, pts, {8, 12, 16});
    REQUIRE(t.rows.size() == 3);
    for (const auto& row : t.rows) {
        CHECK(row.max_iterations <= row.L);
        CHECK(row.points == 20);
    }
    CHECK(t.to_csv().find("fitted_exponent") != std::string::npos);

    const std::vector<ComplexDyadic> outside(10, ComplexDyadic(5));
    const ScalingTable o = benchmark_scaling(dec, outside, {8, 24});
    CHECK(o.rows[1].max_iterations == 0);

    CHECK(fit_exponent({2, 4, 8, 16}, {4, 16, 64, 256}) == doctest::Approx(2.0));
}
