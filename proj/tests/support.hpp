#ifndef CERTJULIA_TESTS_SUPPORT_HPP
#define CERTJULIA_TESTS_SUPPORT_HPP

#include <random>
#include <string>

#include <gmpxx.h>

#include "certjulia/ball.hpp"
#include "certjulia/dyadic.hpp"

namespace test {

inline std::string data(const std::string& file)
{
    return std::string(CERTJULIA_DATA_DIR) + "/" + file;
}

inline certjulia::Dyadic D(const char* s)
{
    return certjulia::Dyadic::parse(s);
}

inline mpq_class Q(const certjulia::Dyadic& d)
{
    mpq_class q(d.mantissa());
    if (d.exponent() >= 0) {
        mpq_mul_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(d.exponent()));
    } else {
        mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(-d.exponent()));
    }
    return q;
}

// random dyadic with `bits` mantissa bits and exponent in [e_lo, e_hi]
inline certjulia::Dyadic random_dyadic(std::mt19937_64& rng, int bits, long e_lo, long e_hi)
{
    std::uniform_int_distribution<long> pe(e_lo, e_hi);
    mpz_class m = 0;
    for (int b = 0; b < bits; b += 32) {
        m = m * 4294967296UL + static_cast<unsigned long>(rng() & 0xffffffffUL);
    }
    if (rng() & 1) {
        m = -m;
    }
    return certjulia::Dyadic::from_parts(m, pe(rng) - bits);
}

// exact: |z - c| <= r with z given as rationals
inline bool ball_holds(const certjulia::Ball& b, const mpq_class& re, const mpq_class& im)
{
    const mpq_class dx = re - Q(b.center.re);
    const mpq_class dy = im - Q(b.center.im);
    const mpq_class r = Q(b.radius);
    return dx * dx + dy * dy <= r * r;
}

// a point of the ball, exact
inline certjulia::ComplexDyadic point_in(const certjulia::Ball& b, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-0.7, 0.7);
    const certjulia::Dyadic r = b.radius;
    const auto sx = certjulia::Dyadic::from_double(u(rng));
    const auto sy = certjulia::Dyadic::from_double(u(rng));
    return {b.center.re + r * sx, b.center.im + r * sy};
}

} // namespace test

#endif
