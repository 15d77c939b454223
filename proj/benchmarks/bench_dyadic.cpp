#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "certjulia/ball.hpp"
#include "certjulia/dyadic.hpp"
#include "certjulia/map.hpp"

using namespace certjulia;

namespace {

Dyadic sample(std::mt19937_64& rng, long bits)
{
    mpz_class m = 0;
    for (long b = 0; b < bits; b += 32) {
        m = m * 4294967296UL + static_cast<unsigned long>(rng() & 0xffffffffUL);
    }
    return Dyadic::from_parts(m, -bits);
}

Ball sample_ball(std::mt19937_64& rng, long bits)
{
    return Ball(ComplexDyadic(sample(rng, bits), sample(rng, bits)), Dyadic::pow2(-bits));
}

void BM_DyadicMul(benchmark::State& state)
{
    std::mt19937_64 rng(1);
    const Dyadic a = sample(rng, state.range(0));
    const Dyadic b = sample(rng, state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(a * b);
    }
}
BENCHMARK(BM_DyadicMul)->RangeMultiplier(4)->Range(64, 4096);

void BM_BallMul(benchmark::State& state)
{
    std::mt19937_64 rng(2);
    const Ball a = sample_ball(rng, state.range(0));
    const Ball b = sample_ball(rng, state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(ball_mul(a, b, state.range(0)));
    }
}
BENCHMARK(BM_BallMul)->RangeMultiplier(4)->Range(64, 4096);

void BM_BallInv(benchmark::State& state)
{
    std::mt19937_64 rng(3);
    Ball a = sample_ball(rng, state.range(0));
    a.center.re = a.center.re + Dyadic(1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ball_inv(a, state.range(0)));
    }
}
BENCHMARK(BM_BallInv)->RangeMultiplier(4)->Range(64, 4096);

void BM_OrbitWithDerivative(benchmark::State& state)
{
    const MapSpec map = MapSpec::load(std::string(CERTJULIA_DATA_DIR) + "/z2.json");
    const ComplexDyadic z(Dyadic::from_double(0.6), Dyadic::from_double(0.8));
    const int steps = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(orbit_with_derivative(map, z, steps, Dyadic::pow2(-steps - 8), Dyadic(2)));
    }
}
BENCHMARK(BM_OrbitWithDerivative)->DenseRange(8, 32, 8);

} // namespace
