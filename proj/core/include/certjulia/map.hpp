#ifndef CERTJULIA_MAP_HPP
#define CERTJULIA_MAP_HPP

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "certjulia/ball.hpp"
#include "certjulia/dyadic.hpp"

namespace certjulia {

class BoxCover;

enum class MapKind { kPolynomial, kRational };

// f = N/D with coefficient k multiplying z^k.  Polynomials have an empty
// denominator.  Infinity is assumed not to lie in the Julia set.
class MapSpec {
public:
    MapKind kind = MapKind::kPolynomial;
    int degree = 2;
    std::vector<CoefficientOracle> numerator;
    std::vector<CoefficientOracle> denominator;
    std::string name;

    static MapSpec polynomial(const std::vector<ComplexDyadic>& coeffs, std::string name = {});
    static MapSpec rational(const std::vector<ComplexDyadic>& num, const std::vector<ComplexDyadic>& den,
                            std::string name = {});
    static MapSpec from_json(const std::string& text);
    static MapSpec load(const std::string& path);
    std::string to_json() const;

    bool is_polynomial() const { return kind == MapKind::kPolynomial; }
    // Coefficients rounded to double, for root finding.
    std::vector<std::complex<double>> numerator_approx() const;
    std::vector<std::complex<double>> denominator_approx() const;

    void check() const;
};

// Ball evaluation of f and f' with coefficients queried at work_bits.
class MapEvaluator {
public:
    MapEvaluator(const MapSpec& map, long work_bits);

    Ball f(const Ball& z) const;
    Ball df(const Ball& z) const;
    // both at once
    std::pair<Ball, Ball> f_df(const Ball& z) const;
    long work_bits() const { return w_; }

private:
    std::pair<Ball, Ball> horner(const std::vector<Ball>& c, const Ball& z) const;

    const MapSpec* map_;
    long w_;
    std::vector<Ball> num_;
    std::vector<Ball> den_;
};

Ball eval_f(const MapSpec& map, const Ball& z, long work_bits);
Ball eval_df(const MapSpec& map, const Ball& z, long work_bits);

struct OrbitPoint {
    int index = 0;
    Ball p;       // contains f^i(z)
    Ball dz;      // contains (f^i)'(z)
    Dyadic d_lo;  // d_lo <= |Df^i(z)| <= d_hi
    Dyadic d_hi;

    const ComplexDyadic& p_approx() const { return p.center; }
    Dyadic d_approx() const { return (d_lo + d_hi).mul_2exp(-1); }
};

struct OrbitInfo {
    long work_bits = 0;
    int attempts = 0;
};

// -floor(log2 t): the number of fractional bits a target t asks for.
long target_bits(const Dyadic& target);
long schedule_work_bits(const Dyadic& target, int i_max, const Dyadic& r_hat);

using OrbitStop = std::function<bool(const OrbitPoint&)>;

// Points i = 1..i_max with p and [d_lo, d_hi] of width <= target.  When
// `stop` returns true the prefix ending at that point is returned.  Throws
// PrecisionExhausted after four doublings of the working precision.
std::vector<OrbitPoint> orbit_with_derivative(const MapSpec& map, const ComplexDyadic& z, int i_max,
                                              const Dyadic& target, const Dyadic& r_hat,
                                              const OrbitStop& stop = {}, OrbitInfo* info = nullptr);

// Upper bound on |f'| over the cover inflated by `inflate_by`.
Dyadic sup_df_on_cover(const MapSpec& map, const BoxCover& cover, const Dyadic& inflate_by);

// All w with f(w) = z, by Durand-Kerner on N(w) - z D(w).
std::vector<std::complex<double>> preimages(const MapSpec& map, std::complex<double> z);

} // namespace certjulia

#endif
