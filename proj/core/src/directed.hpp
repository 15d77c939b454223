// MPFR helpers with directed rounding.  Internal to the library.
#ifndef CERTJULIA_DIRECTED_HPP
#define CERTJULIA_DIRECTED_HPP

#include <mpfr.h>

#include "certjulia/dyadic.hpp"

namespace certjulia::detail {

// RAII mpfr_t
class Mpfr {
public:
    explicit Mpfr(mpfr_prec_t prec = 128) { mpfr_init2(v_, prec); }
    explicit Mpfr(const Dyadic& d);
    ~Mpfr() { mpfr_clear(v_); }
    Mpfr(const Mpfr&) = delete;
    Mpfr& operator=(const Mpfr&) = delete;

    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }
    Dyadic to_dyadic() const;

private:
    mpfr_t v_;
};

mpfr_rnd_t to_rnd(Round mode);

// base^expo, correctly rounded in the requested direction at `prec` bits.
Dyadic pow_directed(const Dyadic& base, const Dyadic& expo, Round mode, mpfr_prec_t prec = 128);
// sqrt(i), directed.
Dyadic sqrt_directed(unsigned long i, Round mode, mpfr_prec_t prec = 128);
// ln(a) / ln(b) for a, b > 1, directed.
Dyadic log_quotient(const Dyadic& a, const Dyadic& b, Round mode, mpfr_prec_t prec = 128);

} // namespace certjulia::detail

#endif
