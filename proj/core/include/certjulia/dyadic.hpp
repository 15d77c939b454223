#ifndef CERTJULIA_DYADIC_HPP
#define CERTJULIA_DYADIC_HPP

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace certjulia {

enum class Round { kDown, kUp, kNearest, kTowardZero };

// mantissa * 2^exponent, canonical: mantissa odd, or zero with exponent 0.
class Dyadic {
public:
    Dyadic() = default;
    Dyadic(long v); // NOLINT(google-explicit-constructor)

    static Dyadic from_parts(mpz_class mantissa, long exponent);
    static Dyadic pow2(long e);
    // Exact; throws on NaN or infinity.
    static Dyadic from_double(double x);
    // Accepts "m*2^e", integers and terminating decimals whose value is dyadic.
    static Dyadic parse(std::string_view s);

    const mpz_class& mantissa() const { return m_; }
    long exponent() const { return e_; }
    int sign() const { return sgn(m_); }
    bool is_zero() const { return sgn(m_) == 0; }
    bool is_integer() const { return e_ >= 0; }
    // floor(log2 |x|); undefined for zero.
    long msb() const;
    // Number of significant bits of the mantissa.
    std::size_t sig_bits() const;

    Dyadic abs() const;
    Dyadic operator-() const;
    Dyadic mul_2exp(long k) const;

    // Result is a multiple of 2^-frac_bits.
    Dyadic round_to(long frac_bits, Round mode) const;
    // Result has at most `bits` significant bits.
    Dyadic round_sig(unsigned bits, Round mode) const;

    // a / b with `sig` significant bits, directed.
    static Dyadic div(const Dyadic& a, const Dyadic& b, unsigned sig, Round mode);
    // sqrt(a) as a multiple of 2^-frac_bits, directed (kDown/kUp/kTowardZero).
    static Dyadic sqrt(const Dyadic& a, long frac_bits, Round mode);

    double to_double(Round mode = Round::kNearest) const;
    // floor / ceil as integers
    mpz_class floor() const;
    mpz_class ceil() const;

    std::string to_string() const;  // "m*2^e"
    std::string to_decimal() const; // exact
    std::size_t hash() const;

    friend Dyadic operator+(const Dyadic& a, const Dyadic& b);
    friend Dyadic operator-(const Dyadic& a, const Dyadic& b);
    friend Dyadic operator*(const Dyadic& a, const Dyadic& b);
    Dyadic& operator+=(const Dyadic& b) { return *this = *this + b; }
    Dyadic& operator-=(const Dyadic& b) { return *this = *this - b; }
    Dyadic& operator*=(const Dyadic& b) { return *this = *this * b; }

    friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b);
    friend bool operator==(const Dyadic& a, const Dyadic& b)
    {
        return a.e_ == b.e_ && a.m_ == b.m_;
    }

private:
    Dyadic(mpz_class m, long e, bool canonical);
    void normalize();

    mpz_class m_ = 0;
    long e_ = 0;
};

const Dyadic& min(const Dyadic& a, const Dyadic& b);
const Dyadic& max(const Dyadic& a, const Dyadic& b);

struct ComplexDyadic {
    Dyadic re;
    Dyadic im;

    ComplexDyadic() = default;
    ComplexDyadic(Dyadic r, Dyadic i = Dyadic()) : re(std::move(r)), im(std::move(i)) {}

    Dyadic norm2() const { return re * re + im * im; }
    ComplexDyadic round_to(long frac_bits, Round mode = Round::kNearest) const
    {
        return {re.round_to(frac_bits, mode), im.round_to(frac_bits, mode)};
    }
    std::string to_string() const;

    friend ComplexDyadic operator+(const ComplexDyadic& a, const ComplexDyadic& b)
    {
        return {a.re + b.re, a.im + b.im};
    }
    friend ComplexDyadic operator-(const ComplexDyadic& a, const ComplexDyadic& b)
    {
        return {a.re - b.re, a.im - b.im};
    }
    friend ComplexDyadic operator*(const ComplexDyadic& a, const ComplexDyadic& b)
    {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend bool operator==(const ComplexDyadic&, const ComplexDyadic&) = default;
};

struct DyadicHash {
    std::size_t operator()(const Dyadic& d) const { return d.hash(); }
    std::size_t operator()(const ComplexDyadic& z) const
    {
        return z.re.hash() * 0x9e3779b97f4a7c15ULL ^ z.im.hash();
    }
};

} // namespace certjulia

#endif
