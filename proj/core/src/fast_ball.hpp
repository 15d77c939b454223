// Rigorous complex balls over doubles.  Every operation bounds its own
// rounding error and inflates the radius upward; centers are exact dyadics.
#ifndef CERTJULIA_FAST_BALL_HPP
#define CERTJULIA_FAST_BALL_HPP

#include <cmath>
#include <vector>

#include "certjulia/ball.hpp"
#include "certjulia/map.hpp"

namespace certjulia::detail {

inline constexpr double kEps = 0x1p-52;

// push a nonnegative bound up past any accumulated rounding
inline double up(double v)
{
    return v * (1.0 + 0x1p-48) + 0x1p-1060;
}

inline double abs_up(double x, double y)
{
    return up(std::hypot(x, y));
}

inline double abs_down(double x, double y)
{
    return std::hypot(x, y) * (1.0 - 0x1p-48);
}

struct FBall {
    double x = 0;
    double y = 0;
    double r = 0;

    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(r); }
};

inline FBall fadd(const FBall& a, const FBall& b)
{
    FBall o{a.x + b.x, a.y + b.y, 0};
    o.r = up(a.r + b.r + (std::fabs(o.x) + std::fabs(o.y)) * kEps);
    return o;
}

inline FBall fmul(const FBall& a, const FBall& b)
{
    FBall o{a.x * b.x - a.y * b.y, a.x * b.y + a.y * b.x, 0};
    const double err = (std::fabs(a.x) + std::fabs(a.y)) * (std::fabs(b.x) + std::fabs(b.y)) * 2 * kEps;
    double r = err;
    if (b.r != 0) {
        r += abs_up(a.x, a.y) * b.r;
    }
    if (a.r != 0) {
        r += abs_up(b.x, b.y) * a.r + a.r * b.r;
    }
    o.r = up(r);
    return o;
}

// 1/w for w in a: center 1/c, radius r / ((|c| - r)|c|).  ok=false when a may contain 0.
inline FBall finv(const FBall& a, bool& ok)
{
    const double lo = abs_down(a.x, a.y) - up(a.r);
    if (!(lo > 0)) {
        ok = false;
        return {};
    }
    const double n2 = a.x * a.x + a.y * a.y;
    FBall o{a.x / n2, -a.y / n2, 0};
    const double mag = abs_up(o.x, o.y);
    o.r = up(up(a.r) / (lo * abs_down(a.x, a.y) * (1.0 - 0x1p-48)) + mag * 8 * kEps);
    ok = true;
    return o;
}

FBall to_fball(const Ball& b);
Ball to_ball(const FBall& b);

// f and f' over double balls.
class FastMap {
public:
    explicit FastMap(const MapSpec& map);

    // ok=false if a denominator may vanish or values overflow
    bool f_df(const FBall& z, FBall& fz, FBall& dfz) const;
    bool f(const FBall& z, FBall& fz) const;

private:
    void horner(const std::vector<FBall>& c, const FBall& z, FBall& p, FBall& dp) const;

    bool rational_;
    std::vector<FBall> num_;
    std::vector<FBall> den_;
};

} // namespace certjulia::detail

#endif
