#ifndef CERTJULIA_BALL_HPP
#define CERTJULIA_BALL_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include <gmpxx.h>

#include "certjulia/dyadic.hpp"

namespace certjulia {

// Radii keep a short mantissa and are always rounded up.
inline constexpr unsigned kRadiusBits = 32;

Dyadic cap_radius(const Dyadic& r);

// Upper / lower bounds on |z|, 32 significant bits.
Dyadic modulus_upper(const ComplexDyadic& z);
Dyadic modulus_lower(const ComplexDyadic& z);

// Closed Euclidean disk.
struct Ball {
    ComplexDyadic center;
    Dyadic radius;

    Ball() = default;
    Ball(ComplexDyadic c, Dyadic r = Dyadic()) : center(std::move(c)), radius(std::move(r)) {}

    bool contains(const ComplexDyadic& z) const;
    bool contains(const Ball& b) const;
    bool contains_zero() const;
    std::string to_string() const;
};

Ball ball_add(const Ball& a, const Ball& b, long work_bits);
Ball ball_sub(const Ball& a, const Ball& b, long work_bits);
Ball ball_mul(const Ball& a, const Ball& b, long work_bits);
Ball ball_scale(const Ball& a, const Dyadic& s);
// Throws DenominatorVanishes when the ball contains 0.
Ball ball_inv(const Ball& a, long work_bits);
Ball ball_div(const Ball& a, const Ball& b, long work_bits);
Ball round_ball(const Ball& a, long target_bits);

struct AbsBounds {
    Dyadic lo;
    Dyadic hi;
};

// lo <= |x| <= hi for every x in a; the square root is taken at frac_bits.
AbsBounds ball_abs_bounds(const Ball& a, long frac_bits = 64);

// Approximations of a complex constant: |query(n) - c| < 2^-n.  Every query
// charges n ticks to a process-wide counter.
class CoefficientOracle {
public:
    using Query = std::function<ComplexDyadic(unsigned bits)>;

    CoefficientOracle();
    static CoefficientOracle exact(ComplexDyadic value);
    static CoefficientOracle rational(const mpq_class& re, const mpq_class& im);
    // Decimal strings, e.g. "0.1" or "-0.75"; exact when the value is dyadic.
    static CoefficientOracle decimal(const std::string& re, const std::string& im);
    static CoefficientOracle from_function(Query q, std::string re_text, std::string im_text);

    ComplexDyadic query(unsigned bits) const;
    // exact oracles give radius 0, others 2^-bits
    Ball ball(unsigned bits) const;

    bool is_exact() const { return exact_.has_value(); }
    const std::optional<ComplexDyadic>& exact_value() const { return exact_; }
    const std::string& re_text() const { return re_text_; }
    const std::string& im_text() const { return im_text_; }

    static std::uint64_t ticks();
    static void reset_ticks();

private:
    Query query_;
    std::optional<ComplexDyadic> exact_;
    std::string re_text_;
    std::string im_text_;
};

} // namespace certjulia

#endif
