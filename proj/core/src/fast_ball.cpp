#include "fast_ball.hpp"

namespace certjulia::detail {

namespace {

FBall coefficient(const CoefficientOracle& c)
{
    const Ball b = c.ball(64);
    FBall o = to_fball(b);
    return o;
}

} // namespace

FBall to_fball(const Ball& b)
{
    FBall o;
    o.x = b.center.re.to_double(Round::kNearest);
    o.y = b.center.im.to_double(Round::kNearest);
    const ComplexDyadic c{Dyadic::from_double(o.x), Dyadic::from_double(o.y)};
    Dyadic r = b.radius;
    if (!(c == b.center)) {
        r += modulus_upper(b.center - c);
    }
    o.r = up(r.to_double(Round::kUp));
    return o;
}

Ball to_ball(const FBall& b)
{
    return Ball({Dyadic::from_double(b.x), Dyadic::from_double(b.y)},
                cap_radius(Dyadic::from_double(b.r)));
}

FastMap::FastMap(const MapSpec& map) : rational_(!map.is_polynomial())
{
    for (const auto& c : map.numerator) {
        num_.push_back(coefficient(c));
    }
    for (const auto& c : map.denominator) {
        den_.push_back(coefficient(c));
    }
}

void FastMap::horner(const std::vector<FBall>& c, const FBall& z, FBall& p, FBall& dp) const
{
    p = c.back();
    dp = FBall{};
    for (std::size_t k = c.size() - 1; k-- > 0;) {
        dp = fadd(fmul(dp, z), p);
        p = fadd(fmul(p, z), c[k]);
    }
}

bool FastMap::f_df(const FBall& z, FBall& fz, FBall& dfz) const
{
    FBall n, dn;
    horner(num_, z, n, dn);
    if (!rational_) {
        fz = n;
        dfz = dn;
        return fz.finite() && dfz.finite();
    }
    FBall d, dd;
    horner(den_, z, d, dd);
    bool ok = true;
    const FBall inv = finv(d, ok);
    if (!ok) {
        return false;
    }
    fz = fmul(n, inv);
    // (N'D - N D') / D^2
    FBall num = fadd(fmul(dn, d), fmul(FBall{-n.x, -n.y, n.r}, dd));
    dfz = fmul(num, fmul(inv, inv));
    return fz.finite() && dfz.finite();
}

bool FastMap::f(const FBall& z, FBall& fz) const
{
    FBall dfz;
    return f_df(z, fz, dfz);
}

} // namespace certjulia::detail
