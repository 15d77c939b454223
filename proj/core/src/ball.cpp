#include "certjulia/ball.hpp"

#include <atomic>
#include <cctype>
#include <cmath>

#include "certjulia/error.hpp"

namespace certjulia {

namespace {

std::atomic<std::uint64_t> g_oracle_ticks{0};

constexpr double kHypotSlack = 1.0 + 0x1p-50;

mpq_class parse_decimal_q(const std::string& text)
{
    std::string s;
    for (char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) {
            s.push_back(c);
        }
    }
    if (s.empty()) {
        return 0;
    }
    if (s.find('*') != std::string::npos) {
        const Dyadic d = Dyadic::parse(s);
        mpq_class q(d.mantissa());
        if (d.exponent() >= 0) {
            mpq_mul_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<unsigned long>(d.exponent()));
        } else {
            mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<unsigned long>(-d.exponent()));
        }
        return q;
    }
    std::string mant = s;
    long exp10 = 0;
    if (auto e = s.find_first_of("eE"); e != std::string::npos) {
        mant = s.substr(0, e);
        exp10 = std::stol(s.substr(e + 1));
    }
    bool neg = false;
    if (!mant.empty() && (mant[0] == '-' || mant[0] == '+')) {
        neg = mant[0] == '-';
        mant.erase(0, 1);
    }
    std::string digits;
    bool after_point = false;
    for (char c : mant) {
        if (c == '.' && !after_point) {
            after_point = true;
            continue;
        }
        if (!std::isdigit(static_cast<unsigned char>(c))) {
            throw ParseError("bad decimal coefficient: " + text);
        }
        digits.push_back(c);
        if (after_point) {
            --exp10;
        }
    }
    if (digits.empty()) {
        throw ParseError("bad decimal coefficient: " + text);
    }
    mpz_class n(digits, 10);
    mpz_class p10;
    mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exp10)));
    mpq_class q = exp10 >= 0 ? mpq_class(n * p10) : mpq_class(n, p10);
    q.canonicalize();
    return neg ? mpq_class(-q) : q;
}

// floor(q * 2^k) * 2^-k
Dyadic truncate_q(const mpq_class& q, unsigned k)
{
    mpz_class num = q.get_num();
    mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(), k);
    mpz_class f;
    mpz_fdiv_q(f.get_mpz_t(), num.get_mpz_t(), q.get_den_mpz_t());
    return Dyadic::from_parts(std::move(f), -static_cast<long>(k));
}

std::optional<Dyadic> exact_dyadic(const mpq_class& q)
{
    const mpz_class& den = q.get_den();
    if (mpz_popcount(den.get_mpz_t()) != 1) {
        return std::nullopt;
    }
    long k = static_cast<long>(mpz_scan1(den.get_mpz_t(), 0));
    return Dyadic::from_parts(q.get_num(), -k);
}

} // namespace

Dyadic cap_radius(const Dyadic& r)
{
    return r.round_sig(kRadiusBits, Round::kUp);
}

Dyadic modulus_upper(const ComplexDyadic& z)
{
    if (z.re.is_zero()) {
        return z.im.abs();
    }
    if (z.im.is_zero()) {
        return z.re.abs();
    }
    const double x = z.re.abs().to_double(Round::kUp);
    const double y = z.im.abs().to_double(Round::kUp);
    double h = std::hypot(x, y) * kHypotSlack;
    h = std::nextafter(h, HUGE_VAL);
    if (!std::isfinite(h)) {
        // fall back to the exact square root
        return Dyadic::sqrt(z.norm2(), 8 - std::min(z.re.msb(), z.im.msb()), Round::kUp)
            .round_sig(kRadiusBits, Round::kUp);
    }
    return Dyadic::from_double(h).round_sig(kRadiusBits, Round::kUp);
}

Dyadic modulus_lower(const ComplexDyadic& z)
{
    if (z.re.is_zero()) {
        return z.im.abs().round_sig(kRadiusBits, Round::kDown);
    }
    if (z.im.is_zero()) {
        return z.re.abs().round_sig(kRadiusBits, Round::kDown);
    }
    const double x = z.re.abs().to_double(Round::kDown);
    const double y = z.im.abs().to_double(Round::kDown);
    double h = std::hypot(x, y) / kHypotSlack;
    h = std::nextafter(h, 0.0);
    if (!std::isfinite(h)) {
        return Dyadic::sqrt(z.norm2(), 8, Round::kDown).round_sig(kRadiusBits, Round::kDown);
    }
    if (h < 0.0) {
        h = 0.0;
    }
    return Dyadic::from_double(h).round_sig(kRadiusBits, Round::kDown);
}

bool Ball::contains(const ComplexDyadic& z) const
{
    return (z - center).norm2() <= radius * radius;
}

bool Ball::contains(const Ball& b) const
{
    // |c_b - c_a| + r_b <= r_a
    if (b.radius > radius) {
        return false;
    }
    const Dyadic slack = radius - b.radius;
    return (b.center - center).norm2() <= slack * slack;
}

bool Ball::contains_zero() const
{
    return center.norm2() <= radius * radius;
}

std::string Ball::to_string() const
{
    return "{" + center.to_string() + " +/- " + radius.to_string() + "}";
}

namespace {

Ball rounded(ComplexDyadic exact_center, Dyadic radius, long work_bits)
{
    ComplexDyadic c = exact_center.round_to(work_bits, Round::kNearest);
    if (!(c == exact_center)) {
        radius = radius + modulus_upper(exact_center - c);
    }
    return {std::move(c), cap_radius(radius)};
}

} // namespace

Ball ball_add(const Ball& a, const Ball& b, long work_bits)
{
    return rounded(a.center + b.center, a.radius + b.radius, work_bits);
}

Ball ball_sub(const Ball& a, const Ball& b, long work_bits)
{
    return rounded(a.center - b.center, a.radius + b.radius, work_bits);
}

Ball ball_mul(const Ball& a, const Ball& b, long work_bits)
{
    Dyadic r;
    if (!b.radius.is_zero()) {
        r += modulus_upper(a.center) * b.radius;
    }
    if (!a.radius.is_zero()) {
        r += modulus_upper(b.center) * a.radius;
        r += a.radius * b.radius;
    }
    return rounded(a.center * b.center, r, work_bits);
}

Ball ball_scale(const Ball& a, const Dyadic& s)
{
    return {{a.center.re * s, a.center.im * s}, cap_radius(a.radius * s.abs())};
}

Ball ball_inv(const Ball& a, long work_bits)
{
    // 1/D(c, r) is the disk with center conj(c)/(|c|^2 - r^2) and radius
    // r/(|c|^2 - r^2).
    const Dyadic denom = a.center.norm2() - a.radius * a.radius;
    if (denom.sign() <= 0) {
        throw DenominatorVanishes();
    }
    const unsigned sig = static_cast<unsigned>(std::max<long>(work_bits, 0)) + 96;
    Dyadic re = Dyadic::div(a.center.re, denom, sig, Round::kNearest);
    Dyadic im = Dyadic::div(-a.center.im, denom, sig, Round::kNearest);
    ComplexDyadic c{re.round_to(work_bits, Round::kNearest), im.round_to(work_bits, Round::kNearest)};
    // division error is relative 2^-sig; bound it together with the final rounding
    const Dyadic mag = modulus_upper({re, im});
    Dyadic disp = Dyadic::pow2(-work_bits) + mag * Dyadic::pow2(-static_cast<long>(sig) + 2);
    Dyadic r = a.radius.is_zero() ? Dyadic()
                                  : Dyadic::div(a.radius, denom, kRadiusBits, Round::kUp);
    return {std::move(c), cap_radius(r + disp)};
}

Ball ball_div(const Ball& a, const Ball& b, long work_bits)
{
    return ball_mul(a, ball_inv(b, work_bits + 8), work_bits);
}

Ball round_ball(const Ball& a, long target_bits)
{
    ComplexDyadic c = a.center.round_to(target_bits, Round::kNearest);
    if (c == a.center) {
        return a;
    }
    return {c, cap_radius(a.radius + modulus_upper(a.center - c))};
}

AbsBounds ball_abs_bounds(const Ball& a, long frac_bits)
{
    const Dyadic n2 = a.center.norm2();
    Dyadic lo = Dyadic::sqrt(n2, frac_bits, Round::kDown) - a.radius;
    if (lo.sign() < 0) {
        lo = Dyadic();
    }
    Dyadic hi = Dyadic::sqrt(n2, frac_bits, Round::kUp) + a.radius;
    return {std::move(lo), std::move(hi)};
}

CoefficientOracle::CoefficientOracle()
    : query_([](unsigned) { return ComplexDyadic(); }), exact_(ComplexDyadic()), re_text_("0"),
      im_text_("0")
{
}

CoefficientOracle CoefficientOracle::exact(ComplexDyadic value)
{
    CoefficientOracle o;
    o.exact_ = value;
    o.re_text_ = value.re.to_string();
    o.im_text_ = value.im.to_string();
    o.query_ = [value](unsigned) { return value; };
    return o;
}

CoefficientOracle CoefficientOracle::rational(const mpq_class& re, const mpq_class& im)
{
    auto dre = exact_dyadic(re);
    auto dim = exact_dyadic(im);
    if (dre && dim) {
        return exact({*dre, *dim});
    }
    CoefficientOracle o;
    o.exact_.reset();
    o.re_text_ = re.get_str();
    o.im_text_ = im.get_str();
    o.query_ = [re, im](unsigned bits) {
        return ComplexDyadic{truncate_q(re, bits + 1), truncate_q(im, bits + 1)};
    };
    return o;
}

CoefficientOracle CoefficientOracle::decimal(const std::string& re, const std::string& im)
{
    CoefficientOracle o = rational(parse_decimal_q(re), parse_decimal_q(im));
    o.re_text_ = re;
    o.im_text_ = im;
    return o;
}

CoefficientOracle CoefficientOracle::from_function(Query q, std::string re_text, std::string im_text)
{
    CoefficientOracle o;
    o.exact_.reset();
    o.query_ = std::move(q);
    o.re_text_ = std::move(re_text);
    o.im_text_ = std::move(im_text);
    return o;
}

ComplexDyadic CoefficientOracle::query(unsigned bits) const
{
    g_oracle_ticks.fetch_add(bits, std::memory_order_relaxed);
    return query_(bits);
}

Ball CoefficientOracle::ball(unsigned bits) const
{
    if (exact_) {
        return Ball(*exact_);
    }
    return Ball(query(bits), Dyadic::pow2(-static_cast<long>(bits)));
}

std::uint64_t CoefficientOracle::ticks()
{
    return g_oracle_ticks.load(std::memory_order_relaxed);
}

void CoefficientOracle::reset_ticks()
{
    g_oracle_ticks.store(0, std::memory_order_relaxed);
}

} // namespace certjulia
