#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "certjulia/decider.hpp"
#include "certjulia/render.hpp"

using namespace certjulia;

namespace {

struct Circle {
    MapSpec map = MapSpec::load(std::string(CERTJULIA_DATA_DIR) + "/z2.json");
    Certificate cert = Certificate::load(std::string(CERTJULIA_DATA_DIR) + "/circle.cert.json");
    Decider dec{cert, map};
    std::vector<ComplexDyadic> near;

    Circle()
    {
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> u(0, 1);
        for (int k = 0; k < 256; ++k) {
            const double th = 2 * M_PI * u(rng);
            const double rho = 1 + std::ldexp(u(rng) - 0.5, -6);
            near.emplace_back(Dyadic::from_double(rho * std::cos(th)), Dyadic::from_double(rho * std::sin(th)));
        }
    }
};

const Circle& circle()
{
    static const Circle c;
    return c;
}

void BM_Decide(benchmark::State& state)
{
    const Circle& c = circle();
    const int n = static_cast<int>(state.range(0));
    std::size_t k = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(c.dec.decide(n, c.near[k++ % c.near.size()]));
    }
}
BENCHMARK(BM_Decide)->DenseRange(8, 24, 4)->Unit(benchmark::kMicrosecond);

void BM_DecideFast(benchmark::State& state)
{
    const Circle& c = circle();
    const int n = static_cast<int>(state.range(0));
    std::size_t k = 0;
    for (auto _ : state) {
        const ComplexDyadic& z = c.near[k++ % c.near.size()];
        benchmark::DoNotOptimize(c.dec.decide_fast(n, z.re.to_double(), z.im.to_double()));
    }
}
BENCHMARK(BM_DecideFast)->DenseRange(8, 24, 4)->Unit(benchmark::kMicrosecond);

void BM_PixelValue(benchmark::State& state)
{
    const Circle& c = circle();
    const int n = static_cast<int>(state.range(0));
    const double delta = std::ldexp(1.0, -n - 2);
    std::size_t k = 0;
    for (auto _ : state) {
        const ComplexDyadic& z = c.near[k++ % c.near.size()];
        // snap onto the pixel grid
        const ComplexDyadic p(Dyadic::from_double(std::round(z.re.to_double() / delta) * delta),
                              Dyadic::from_double(std::round(z.im.to_double() / delta) * delta));
        benchmark::DoNotOptimize(c.dec.pixel_value(n, p));
    }
}
BENCHMARK(BM_PixelValue)->DenseRange(8, 16, 4)->Unit(benchmark::kMicrosecond);

void BM_RenderCircle(benchmark::State& state)
{
    const Circle& c = circle();
    const Region region = Region::parse("-1.5,-1.5,1.5,1.5");
    for (auto _ : state) {
        benchmark::DoNotOptimize(render_certified(c.dec, region, static_cast<int>(state.range(0)), 1));
    }
}
BENCHMARK(BM_RenderCircle)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

} // namespace
