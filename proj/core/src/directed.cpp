#include "directed.hpp"

#include <algorithm>
#include <stdexcept>

namespace certjulia::detail {

Mpfr::Mpfr(const Dyadic& d)
{
    const auto bits = static_cast<mpfr_prec_t>(std::max<std::size_t>(d.sig_bits(), 2));
    mpfr_init2(v_, bits);
    mpfr_set_z_2exp(v_, d.mantissa().get_mpz_t(), d.exponent(), MPFR_RNDN); // exact
}

Dyadic Mpfr::to_dyadic() const
{
    if (mpfr_zero_p(v_)) {
        return Dyadic();
    }
    if (!mpfr_number_p(v_)) {
        throw std::domain_error("non-finite MPFR value");
    }
    mpz_class m;
    mpfr_exp_t e = mpfr_get_z_2exp(m.get_mpz_t(), v_);
    return Dyadic::from_parts(std::move(m), e);
}

mpfr_rnd_t to_rnd(Round mode)
{
    switch (mode) {
    case Round::kDown:
        return MPFR_RNDD;
    case Round::kUp:
        return MPFR_RNDU;
    case Round::kTowardZero:
        return MPFR_RNDZ;
    case Round::kNearest:
        break;
    }
    return MPFR_RNDN;
}

Dyadic pow_directed(const Dyadic& base, const Dyadic& expo, Round mode, mpfr_prec_t prec)
{
    Mpfr b(base);
    Mpfr x(expo);
    Mpfr out(prec);
    mpfr_pow(out.get(), b.get(), x.get(), to_rnd(mode));
    return out.to_dyadic();
}

Dyadic sqrt_directed(unsigned long i, Round mode, mpfr_prec_t prec)
{
    Mpfr out(prec);
    mpfr_sqrt_ui(out.get(), i, to_rnd(mode));
    return out.to_dyadic();
}

Dyadic log_quotient(const Dyadic& a, const Dyadic& b, Round mode, mpfr_prec_t prec)
{
    if (a <= Dyadic(1) || b <= Dyadic(1)) {
        throw std::domain_error("log_quotient needs arguments > 1");
    }
    const bool up = mode == Round::kUp;
    Mpfr ma(a);
    Mpfr mb(b);
    Mpfr la(prec);
    Mpfr lb(prec);
    mpfr_log(la.get(), ma.get(), up ? MPFR_RNDU : MPFR_RNDD);
    mpfr_log(lb.get(), mb.get(), up ? MPFR_RNDD : MPFR_RNDU);
    Mpfr q(prec);
    mpfr_div(q.get(), la.get(), lb.get(), up ? MPFR_RNDU : MPFR_RNDD);
    return q.to_dyadic();
}

} // namespace certjulia::detail
