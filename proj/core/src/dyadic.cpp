#include "certjulia/dyadic.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "certjulia/error.hpp"

namespace certjulia {

namespace {

std::size_t bit_length(const mpz_class& m)
{
    return mpz_sizeinbase(m.get_mpz_t(), 2);
}

// m / 2^k rounded as requested, k >= 0.
mpz_class shift_round(const mpz_class& m, unsigned long k, Round mode)
{
    mpz_class q;
    switch (mode) {
    case Round::kDown:
        mpz_fdiv_q_2exp(q.get_mpz_t(), m.get_mpz_t(), k);
        break;
    case Round::kUp:
        mpz_cdiv_q_2exp(q.get_mpz_t(), m.get_mpz_t(), k);
        break;
    case Round::kTowardZero:
        mpz_tdiv_q_2exp(q.get_mpz_t(), m.get_mpz_t(), k);
        break;
    case Round::kNearest: {
        mpz_class t = m;
        if (k > 0) {
            mpz_class half;
            mpz_ui_pow_ui(half.get_mpz_t(), 2, k - 1);
            t += half;
        }
        mpz_fdiv_q_2exp(q.get_mpz_t(), t.get_mpz_t(), k);
        break;
    }
    }
    return q;
}

} // namespace

Dyadic::Dyadic(long v) : m_(v), e_(0)
{
    normalize();
}

Dyadic::Dyadic(mpz_class m, long e, bool canonical) : m_(std::move(m)), e_(e)
{
    if (!canonical) {
        normalize();
    }
}

void Dyadic::normalize()
{
    if (sgn(m_) == 0) {
        e_ = 0;
        return;
    }
    unsigned long s = mpz_scan1(m_.get_mpz_t(), 0);
    if (s > 0) {
        mpz_tdiv_q_2exp(m_.get_mpz_t(), m_.get_mpz_t(), s);
        e_ += static_cast<long>(s);
    }
}

Dyadic Dyadic::from_parts(mpz_class mantissa, long exponent)
{
    return Dyadic(std::move(mantissa), exponent, false);
}

Dyadic Dyadic::pow2(long e)
{
    return Dyadic(mpz_class(1), e, true);
}

Dyadic Dyadic::from_double(double x)
{
    if (!std::isfinite(x)) {
        throw std::domain_error("Dyadic::from_double: non-finite value");
    }
    if (x == 0.0) {
        return Dyadic();
    }
    int k = 0;
    double f = std::frexp(x, &k);
    mpz_class m(std::ldexp(f, 53)); // integer valued, exact
    return Dyadic(std::move(m), k - 53, false);
}

Dyadic Dyadic::parse(std::string_view s)
{
    auto trim = [](std::string_view v) {
        while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) {
            v.remove_prefix(1);
        }
        while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) {
            v.remove_suffix(1);
        }
        return v;
    };
    s = trim(s);
    if (s.empty()) {
        throw ParseError("empty dyadic literal");
    }
    auto parse_int = [&](std::string_view v) {
        v = trim(v);
        std::string str(v);
        if (!str.empty() && str[0] == '+') {
            str.erase(0, 1);
        }
        if (str.empty() || str == "-") {
            throw ParseError("bad integer in dyadic literal: " + std::string(s));
        }
        for (std::size_t i = (str[0] == '-') ? 1 : 0; i < str.size(); ++i) {
            if (!std::isdigit(static_cast<unsigned char>(str[i]))) {
                throw ParseError("bad integer in dyadic literal: " + std::string(s));
            }
        }
        return mpz_class(str, 10);
    };

    if (auto star = s.find('*'); star != std::string_view::npos) {
        auto rest = trim(s.substr(star + 1));
        if (rest.substr(0, 2) != "2^") {
            throw ParseError("expected m*2^e: " + std::string(s));
        }
        mpz_class m = parse_int(s.substr(0, star));
        mpz_class e = parse_int(rest.substr(2));
        if (!e.fits_slong_p()) {
            throw ParseError("exponent out of range: " + std::string(s));
        }
        return from_parts(std::move(m), e.get_si());
    }

    auto dot = s.find('.');
    if (dot == std::string_view::npos) {
        return from_parts(parse_int(s), 0);
    }
    std::string_view ip = s.substr(0, dot);
    std::string_view fp = s.substr(dot + 1);
    bool neg = !ip.empty() && ip[0] == '-';
    if (!ip.empty() && (ip[0] == '-' || ip[0] == '+')) {
        ip.remove_prefix(1);
    }
    while (!fp.empty() && fp.back() == '0') {
        fp.remove_suffix(1);
    }
    std::string digits = std::string(ip.empty() ? "0" : ip) + std::string(fp);
    for (char c : digits) {
        if (!std::isdigit(static_cast<unsigned char>(c))) {
            throw ParseError("bad decimal literal: " + std::string(s));
        }
    }
    mpz_class n(digits, 10);
    const unsigned long k = fp.size();
    mpz_class p5;
    mpz_ui_pow_ui(p5.get_mpz_t(), 5, k);
    if (!mpz_divisible_p(n.get_mpz_t(), p5.get_mpz_t())) {
        throw ParseError("decimal is not a dyadic rational: " + std::string(s));
    }
    mpz_divexact(n.get_mpz_t(), n.get_mpz_t(), p5.get_mpz_t());
    if (neg) {
        n = -n;
    }
    return from_parts(std::move(n), -static_cast<long>(k));
}

long Dyadic::msb() const
{
    return e_ + static_cast<long>(bit_length(m_)) - 1;
}

std::size_t Dyadic::sig_bits() const
{
    return is_zero() ? 0 : bit_length(m_);
}

Dyadic Dyadic::abs() const
{
    return Dyadic(sgn(m_) < 0 ? mpz_class(-m_) : m_, e_, true);
}

Dyadic Dyadic::operator-() const
{
    return Dyadic(mpz_class(-m_), e_, true);
}

Dyadic Dyadic::mul_2exp(long k) const
{
    if (is_zero()) {
        return *this;
    }
    return Dyadic(m_, e_ + k, true);
}

Dyadic Dyadic::round_to(long frac_bits, Round mode) const
{
    if (e_ >= -frac_bits) {
        return *this;
    }
    unsigned long shift = static_cast<unsigned long>(-frac_bits - e_);
    return from_parts(shift_round(m_, shift, mode), -frac_bits);
}

Dyadic Dyadic::round_sig(unsigned bits, Round mode) const
{
    if (is_zero()) {
        return *this;
    }
    long nb = static_cast<long>(bit_length(m_));
    if (nb <= static_cast<long>(bits)) {
        return *this;
    }
    return round_to(-(e_ + nb - static_cast<long>(bits)), mode);
}

Dyadic Dyadic::div(const Dyadic& a, const Dyadic& b, unsigned sig, Round mode)
{
    if (b.is_zero()) {
        throw DenominatorVanishes("Dyadic::div by zero");
    }
    if (a.is_zero()) {
        return Dyadic();
    }
    const int s = sgn(a.m_) * sgn(b.m_);
    mpz_class am = a.m_ < 0 ? mpz_class(-a.m_) : a.m_;
    mpz_class bm = b.m_ < 0 ? mpz_class(-b.m_) : b.m_;
    long k = static_cast<long>(sig) + static_cast<long>(bit_length(bm))
             - static_cast<long>(bit_length(am)) + 2;
    if (k < 0) {
        k = 0;
    }
    mpz_class num = am;
    mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(), static_cast<unsigned long>(k));
    mpz_class q, r;
    mpz_tdiv_qr(q.get_mpz_t(), r.get_mpz_t(), num.get_mpz_t(), bm.get_mpz_t());
    if (sgn(r) != 0) {
        bool bump = false;
        switch (mode) {
        case Round::kUp:
            bump = s > 0;
            break;
        case Round::kDown:
            bump = s < 0;
            break;
        case Round::kTowardZero:
            bump = false;
            break;
        case Round::kNearest:
            bump = 2 * r >= bm;
            break;
        }
        if (bump) {
            q += 1;
        }
    }
    if (s < 0) {
        q = -q;
    }
    Dyadic out = from_parts(std::move(q), a.e_ - b.e_ - k);
    return out.round_sig(sig, mode);
}

Dyadic Dyadic::sqrt(const Dyadic& a, long frac_bits, Round mode)
{
    if (a.sign() < 0) {
        throw std::domain_error("Dyadic::sqrt of negative value");
    }
    if (a.is_zero()) {
        return Dyadic();
    }
    if (mode == Round::kNearest) {
        Dyadic fine = sqrt(a, frac_bits + 2, Round::kDown);
        return fine.round_to(frac_bits, Round::kNearest);
    }
    long t = a.e_ + 2 * frac_bits;
    mpz_class n;
    bool exact_shift = true;
    if (t >= 0) {
        mpz_mul_2exp(n.get_mpz_t(), a.m_.get_mpz_t(), static_cast<unsigned long>(t));
    } else {
        auto k = static_cast<unsigned long>(-t);
        mpz_fdiv_q_2exp(n.get_mpz_t(), a.m_.get_mpz_t(), k);
        exact_shift = mpz_scan1(a.m_.get_mpz_t(), 0) >= k;
    }
    mpz_class r;
    mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
    bool exact = exact_shift && r * r == n;
    if (!exact && mode == Round::kUp) {
        r += 1;
    }
    return from_parts(std::move(r), -frac_bits);
}

double Dyadic::to_double(Round mode) const
{
    if (is_zero()) {
        return 0.0;
    }
    Dyadic r = round_sig(53, mode);
    double mant = r.m_.get_d(); // exact: at most 53 bits
    if (r.e_ > std::numeric_limits<int>::max() / 2) {
        return sign() > 0 ? std::numeric_limits<double>::infinity()
                          : -std::numeric_limits<double>::infinity();
    }
    if (r.e_ < std::numeric_limits<int>::min() / 2) {
        mant = std::copysign(0.0, mant);
    } else {
        mant = std::ldexp(mant, static_cast<int>(r.e_));
    }
    if (std::isfinite(mant) && mant != 0.0 && from_double(mant) == r) {
        return mant;
    }
    // overflow or subnormal rounding; fix the direction
    const double inf = std::numeric_limits<double>::infinity();
    if (std::isinf(mant)) {
        if ((mode == Round::kDown && sign() > 0) || (mode == Round::kUp && sign() < 0)
            || mode == Round::kTowardZero) {
            return std::copysign(std::numeric_limits<double>::max(), mant);
        }
        return mant;
    }
    Dyadic got = from_double(mant);
    if (mode == Round::kUp && got < r) {
        return std::nextafter(mant, inf);
    }
    if (mode == Round::kDown && got > r) {
        return std::nextafter(mant, -inf);
    }
    if (mode == Round::kTowardZero && got.abs() > r.abs()) {
        return std::nextafter(mant, 0.0);
    }
    return mant;
}

mpz_class Dyadic::floor() const
{
    mpz_class q;
    if (e_ >= 0) {
        mpz_mul_2exp(q.get_mpz_t(), m_.get_mpz_t(), static_cast<unsigned long>(e_));
    } else {
        mpz_fdiv_q_2exp(q.get_mpz_t(), m_.get_mpz_t(), static_cast<unsigned long>(-e_));
    }
    return q;
}

mpz_class Dyadic::ceil() const
{
    mpz_class q;
    if (e_ >= 0) {
        mpz_mul_2exp(q.get_mpz_t(), m_.get_mpz_t(), static_cast<unsigned long>(e_));
    } else {
        mpz_cdiv_q_2exp(q.get_mpz_t(), m_.get_mpz_t(), static_cast<unsigned long>(-e_));
    }
    return q;
}

std::string Dyadic::to_string() const
{
    return m_.get_str() + "*2^" + std::to_string(e_);
}

std::string Dyadic::to_decimal() const
{
    if (e_ >= 0) {
        mpz_class v;
        mpz_mul_2exp(v.get_mpz_t(), m_.get_mpz_t(), static_cast<unsigned long>(e_));
        return v.get_str();
    }
    const auto k = static_cast<unsigned long>(-e_);
    mpz_class n = m_ < 0 ? mpz_class(-m_) : m_;
    mpz_class p5;
    mpz_ui_pow_ui(p5.get_mpz_t(), 5, k);
    n *= p5;
    std::string digits = n.get_str();
    if (digits.size() <= k) {
        digits.insert(0, k + 1 - digits.size(), '0');
    }
    digits.insert(digits.size() - k, ".");
    return (m_ < 0 ? "-" : "") + digits;
}

std::size_t Dyadic::hash() const
{
    std::size_t h = std::hash<long>{}(e_);
    const mpz_srcptr p = m_.get_mpz_t();
    const int n = std::abs(p->_mp_size);
    for (int i = 0; i < n; ++i) {
        h ^= std::hash<mp_limb_t>{}(p->_mp_d[i]) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h ^ static_cast<std::size_t>(p->_mp_size < 0);
}

Dyadic operator+(const Dyadic& a, const Dyadic& b)
{
    if (a.is_zero()) {
        return b;
    }
    if (b.is_zero()) {
        return a;
    }
    mpz_class m;
    long e;
    if (a.e_ >= b.e_) {
        mpz_mul_2exp(m.get_mpz_t(), a.m_.get_mpz_t(), static_cast<unsigned long>(a.e_ - b.e_));
        m += b.m_;
        e = b.e_;
    } else {
        mpz_mul_2exp(m.get_mpz_t(), b.m_.get_mpz_t(), static_cast<unsigned long>(b.e_ - a.e_));
        m += a.m_;
        e = a.e_;
    }
    return Dyadic::from_parts(std::move(m), e);
}

Dyadic operator-(const Dyadic& a, const Dyadic& b)
{
    return a + (-b);
}

Dyadic operator*(const Dyadic& a, const Dyadic& b)
{
    if (a.is_zero() || b.is_zero()) {
        return Dyadic();
    }
    // odd * odd is odd, so the product is already canonical
    return Dyadic(a.m_ * b.m_, a.e_ + b.e_, true);
}

std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b)
{
    const int sa = a.sign();
    const int sb = b.sign();
    if (sa != sb) {
        return sa <=> sb;
    }
    if (sa == 0) {
        return std::strong_ordering::equal;
    }
    const long ma = a.msb();
    const long mb = b.msb();
    if (ma != mb) {
        return sa > 0 ? ma <=> mb : mb <=> ma;
    }
    int c;
    if (a.e_ >= b.e_) {
        mpz_class t;
        mpz_mul_2exp(t.get_mpz_t(), a.m_.get_mpz_t(), static_cast<unsigned long>(a.e_ - b.e_));
        c = cmp(t, b.m_);
    } else {
        mpz_class t;
        mpz_mul_2exp(t.get_mpz_t(), b.m_.get_mpz_t(), static_cast<unsigned long>(b.e_ - a.e_));
        c = cmp(a.m_, t);
    }
    return c <=> 0;
}

const Dyadic& min(const Dyadic& a, const Dyadic& b)
{
    return b < a ? b : a;
}

const Dyadic& max(const Dyadic& a, const Dyadic& b)
{
    return a < b ? b : a;
}

std::string ComplexDyadic::to_string() const
{
    return "(" + re.to_string() + ", " + im.to_string() + ")";
}

} // namespace certjulia
