#include "certjulia/decider.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "certjulia/error.hpp"
#include "fast_ball.hpp"

namespace certjulia {

using detail::FBall;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrt2Up = 1.4142135623730951 * (1 + 0x1p-50);
// precomputed table length for C^sqrt(i) and lambda^j
constexpr int kTable = 1024;

double down(double v)
{
    return v * (1.0 - 0x1p-48);
}

} // namespace

std::string to_string(Reason r)
{
    switch (r) {
    case Reason::kExitStep3:
        return "exit-step3";
    case Reason::kExitStep4:
        return "exit-step4";
    case Reason::kExitStep6:
        return "exit-step6";
    case Reason::kOutsideU:
        return "outside-U";
    case Reason::kCoarseCover:
        break;
    }
    return "coarse-cover";
}

void DeciderStats::record(const Verdict& v)
{
    ++subprogram_calls;
    ++reasons[static_cast<std::size_t>(v.reason)];
    ++iterations[v.iterations_used];
    max_work_bits = std::max(max_work_bits, v.max_work_bits);
}

void DeciderStats::merge(const DeciderStats& o)
{
    subprogram_calls += o.subprogram_calls;
    for (std::size_t i = 0; i < reasons.size(); ++i) {
        reasons[i] += o.reasons[i];
    }
    for (const auto& [k, v] : o.iterations) {
        iterations[k] += v;
    }
    max_work_bits = std::max(max_work_bits, o.max_work_bits);
    fast_fallbacks += o.fast_fallbacks;
    probes += o.probes;
    ball_tests += o.ball_tests;
    ball_cleared += o.ball_cleared;
    cells += o.cells;
    pixels += o.pixels;
}

Decider::Decider(const Certificate& cert, const MapSpec& map)
    : cert_(&cert), map_(&map), fast_(std::make_unique<detail::FastMap>(map)), n0_(cert.n0())
{
    eps_ = cert.eps.value.to_double(Round::kDown);
    K1_lo_ = cert.K1.value.to_double(Round::kDown);
    K2_hi_ = cert.K2.value.to_double(Round::kUp);
    cs_hi_.resize(kTable + 1);
    lambda_pow_.resize(kTable + 1);
    Dyadic lp(1);
    for (int i = 0; i <= kTable; ++i) {
        cs_hi_[static_cast<std::size_t>(i)] = i == 0 ? 1.0 : C_pow_sqrt_up(cert.C.value, i).to_double(Round::kUp);
        lambda_pow_[static_cast<std::size_t>(i)] = lp.to_double(Round::kUp);
        lp = (lp * cert.lambda.value).round_sig(64, Round::kUp);
    }
}

Decider::~Decider() = default;

const Decider::Level& Decider::level(int n) const
{
    std::lock_guard<std::mutex> lock(mu_);
    auto it = levels_.find(n);
    if (it != levels_.end()) {
        return *it->second;
    }
    auto lev = std::make_unique<Level>();
    lev->n = n;
    lev->L = L_of(*cert_, n);
    if (lev->L > kTable) {
        throw InvalidConstants("L(n) exceeds the supported iteration bound");
    }
    lev->target = min(Dyadic::pow2(-n - 1), cert_->eps.value);
    lev->thresh.resize(static_cast<std::size_t>(lev->L) + 1);
    lev->thresh_lo.resize(lev->thresh.size());
    lev->thresh_hi.resize(lev->thresh.size());
    for (int i = 1; i <= lev->L; ++i) {
        const auto k = static_cast<std::size_t>(i);
        lev->thresh[k] = threshold(*cert_, i, n);
        lev->thresh_lo[k] = lev->thresh[k].to_double(Round::kDown);
        lev->thresh_hi[k] = lev->thresh[k].to_double(Round::kUp);
    }
    lev->gap = gap_K(*cert_, n);
    lev->gap_lo = lev->gap.to_double(Round::kDown);
    const Level& ref = *lev;
    levels_.emplace(n, std::move(lev));
    return ref;
}

Verdict Decider::subprogram(int n, const ComplexDyadic& z, DeciderStats* stats) const
{
    const Level& lev = level(n);
    const BoxCover& U = cert_->U;
    OrbitInfo info;
    const auto orbit = orbit_with_derivative(
        *map_, z, lev.L, lev.target, cert_->R_hat.value,
        [&U](const OrbitPoint& pt) { return !U.contains(pt.p_approx()); }, &info);
    Verdict v;
    v.max_work_bits = info.work_bits;
    const OrbitPoint& last = orbit.back();
    v.iterations_used = last.index;
    if (U.contains(last.p_approx())) {
        v.bit = 0;
        v.reason = Reason::kExitStep6;
    } else if (last.d_approx() >= lev.thresh[static_cast<std::size_t>(last.index)]) {
        v.bit = 0;
        v.reason = Reason::kExitStep3;
    } else {
        v.bit = 1;
        v.reason = Reason::kExitStep4;
    }
    if (stats != nullptr) {
        stats->record(v);
    }
    return v;
}

Verdict Decider::decide_far_outside_U(int n, const ComplexDyadic& z, DeciderStats* stats) const
{
    (void)n;
    (void)z;
    Verdict v;
    v.bit = 1;
    v.reason = Reason::kOutsideU;
    v.iterations_used = 0;
    if (stats != nullptr) {
        stats->record(v);
    }
    return v;
}

Verdict Decider::decide(int n, const ComplexDyadic& z, DeciderStats* stats) const
{
    if (!cert_->U.contains(z)) {
        return decide_far_outside_U(n, z, stats);
    }
    return subprogram(n, z, stats);
}

Verdict Decider::decide_fast(int n, double x, double y, DeciderStats* stats) const
{
    const BoxCover& U = cert_->U;
    if (!U.contains(x, y)) {
        return decide_far_outside_U(n, {Dyadic::from_double(x), Dyadic::from_double(y)}, stats);
    }
    const Level& lev = level(n);
    const double target = lev.target.to_double(Round::kDown);
    FBall p{x, y, 0};
    FBall d{1, 0, 0};
    for (int i = 1; i <= lev.L; ++i) {
        FBall fz;
        FBall dfz;
        if (!fast_->f_df(p, fz, dfz)) {
            break;
        }
        d = detail::fmul(d, dfz);
        p = fz;
        if (!(p.r <= target)) {
            break;
        }
        Verdict v;
        v.iterations_used = i;
        v.max_work_bits = 53;
        if (i == lev.L && U.contains(p.x, p.y)) {
            v.bit = 0;
            v.reason = Reason::kExitStep6;
            if (stats != nullptr) {
                stats->record(v);
            }
            return v;
        }
        if (U.contains(p.x, p.y)) {
            continue;
        }
        const double lo = std::max(0.0, detail::abs_down(d.x, d.y) - detail::up(d.r));
        const double hi = detail::up(detail::abs_up(d.x, d.y) + d.r);
        if (!(hi - lo <= target * (1 - 0x1p-40))) {
            break;
        }
        const double approx = 0.5 * (lo + hi);
        const auto k = static_cast<std::size_t>(i);
        bool close;
        if (approx >= lev.thresh_hi[k]) {
            close = true;
        } else if (approx < lev.thresh_lo[k]) {
            close = false;
        } else {
            close = Dyadic::from_double(approx) >= lev.thresh[k];
        }
        v.bit = close ? 0 : 1;
        v.reason = close ? Reason::kExitStep3 : Reason::kExitStep4;
        if (stats != nullptr) {
            stats->record(v);
        }
        return v;
    }
    if (stats != nullptr) {
        ++stats->fast_fallbacks;
    }
    return subprogram(n, {Dyadic::from_double(x), Dyadic::from_double(y)}, stats);
}

DistanceBracket Decider::probe(double x, double y, int m, DeciderStats* stats) const
{
    if (stats != nullptr) {
        ++stats->probes;
    }
    const BoxCover& U = cert_->U;
    if (!U.contains(x, y)) {
        // every point of J has its 2 eps disk inside U
        return {down(U.dist_lower_fast(x, y) + 2 * eps_), kInf};
    }
    const int L = level(m).L;
    FBall p{x, y, 0};
    FBall d{1, 0, 0};
    for (int i = 1; i <= L; ++i) {
        FBall fz;
        FBall dfz;
        // q_1 .. q_{i-1} are approximants inside U
        const double esc = lambda_pow_[static_cast<std::size_t>(i - 1)];
        if (!fast_->f_df(p, fz, dfz)) {
            return {0, esc};
        }
        d = detail::fmul(d, dfz);
        p = fz;
        if (!(p.r <= eps_)) {
            return {0, esc};
        }
        if (!U.contains(p.x, p.y)) {
            const double dlo = detail::abs_down(d.x, d.y) - detail::up(d.r);
            const double dhi = detail::up(detail::abs_up(d.x, d.y) + d.r);
            DistanceBracket b;
            b.lo = down(K1_lo_ / dhi);
            b.hi = esc;
            if (dlo > 0) {
                b.hi = std::min(b.hi, detail::up(K2_hi_ * cs_hi_[static_cast<std::size_t>(i)] / dlo));
            }
            return b;
        }
    }
    return {0, lambda_pow_[static_cast<std::size_t>(L)]};
}

bool Decider::ball_is_julia_free(double x, double y, double radius, int max_steps, DeciderStats* stats) const
{
    if (stats != nullptr) {
        ++stats->ball_tests;
    }
    const BoxCover& U = cert_->U;
    auto clear = [&](const FBall& b) { return U.dist_lower_fast(b.x, b.y, 2 * b.r + 1e-300) > b.r; };
    FBall b{x, y, detail::up(radius)};
    bool ok = clear(b);
    const double limit = 1.0;
    for (int i = 0; i < max_steps && !ok; ++i) {
        FBall fz;
        if (!fast_->f(b, fz) || !(fz.r < limit)) {
            return false;
        }
        b = fz;
        ok = clear(b);
    }
    if (ok && stats != nullptr) {
        ++stats->ball_cleared;
    }
    return ok;
}

namespace {

struct Child {
    double x;
    double y;
    DistanceBracket br;
    int idx;
};

} // namespace

int Decider::dfs(int n, double zx, double zy, double cx, double cy, double a, int depth, int leaf_depth,
                 DeciderStats* stats) const
{
    const int m = n + 2;
    const double delta = std::ldexp(1.0, -n - 2);
    if (stats != nullptr) {
        ++stats->cells;
    }
    const double h = detail::up(a * kSqrt2Up);
    if (ball_is_julia_free(cx, cy, h, level(m).L + 4, stats)) {
        return 0;
    }
    if (depth >= leaf_depth) {
        // J-free when the answer is 1, since then d >= K 2^-m-1 > h; within
        // 2^-m-1 = delta/2 of J when it is 0, and that is < 2 delta from z
        return decide_fast(m, cx, cy, stats).bit == 0 ? 1 : 0;
    }
    const double q = a / 2;
    Child kids[4];
    int nk = 0;
    const double dx[4] = {-q, q, -q, q};
    const double dy[4] = {-q, -q, q, q};
    for (int k = 0; k < 4; ++k) {
        const double x = cx + dx[k];
        const double y = cy + dy[k];
        const double gx = std::max(std::fabs(x - zx) - q, 0.0);
        const double gy = std::max(std::fabs(y - zy) - q, 0.0);
        if (std::hypot(gx, gy) * (1 - 0x1p-40) > delta) {
            continue; // misses the pixel disk
        }
        const DistanceBracket br = probe(x, y, m, stats);
        if (detail::up(detail::abs_up(x - zx, y - zy) + br.hi) < 2 * delta) {
            return 1;
        }
        if (br.lo > detail::up(q * kSqrt2Up)) {
            continue;
        }
        kids[nk++] = {x, y, br, k};
    }
    std::sort(kids, kids + nk, [](const Child& u, const Child& v) {
        if (u.br.hi != v.br.hi) {
            return u.br.hi < v.br.hi;
        }
        return u.idx < v.idx;
    });
    for (int k = 0; k < nk; ++k) {
        if (dfs(n, zx, zy, kids[k].x, kids[k].y, q, depth + 1, leaf_depth, stats) == 1) {
            return 1;
        }
    }
    return 0;
}

int Decider::pixel_value(int n, const ComplexDyadic& z, DeciderStats* stats) const
{
    const double zx = z.re.to_double();
    const double zy = z.im.to_double();
    if (!(Dyadic::from_double(zx) == z.re) || !(Dyadic::from_double(zy) == z.im)) {
        throw std::invalid_argument("pixel_value: center is not representable as a double");
    }
    if (stats != nullptr) {
        ++stats->pixels;
    }
    const int m = n + 2;
    const double delta = std::ldexp(1.0, -n - 2);
    const DistanceBracket root = probe(zx, zy, m, stats);
    if (root.hi < 2 * delta) {
        return 1;
    }
    if (root.lo > delta) {
        return 0;
    }
    const Level& lev = level(m);
    const double leaf_size = std::min(lev.gap_lo * std::ldexp(1.0, -m - 1), 2 * eps_);
    int leaf_depth = 0;
    while (detail::up(std::ldexp(delta, -leaf_depth) * kSqrt2Up) >= leaf_size) {
        ++leaf_depth;
    }
    return dfs(n, zx, zy, zx, zy, delta, 0, leaf_depth, stats);
}

int Decider::pixel_value_grid(int n, const ComplexDyadic& z, DeciderStats* stats) const
{
    const int np = n + 1;
    const Dyadic g = level(np).gap.mul_2exp(-np - 1);
    // largest power of two not above g/2
    const long k = -(g.msb() - 1);
    const double s = std::ldexp(1.0, static_cast<int>(-k));
    const double delta = std::ldexp(1.0, -n - 2);
    const long span = static_cast<long>(std::floor(delta / s));
    const double zx = z.re.to_double();
    const double zy = z.im.to_double();
    if (stats != nullptr) {
        ++stats->pixels;
    }
    for (long j = -span; j <= span; ++j) {
        for (long i = -span; i <= span; ++i) {
            if (static_cast<double>(i * i + j * j) * s * s > delta * delta) {
                continue;
            }
            if (decide_fast(np, zx + static_cast<double>(i) * s, zy + static_cast<double>(j) * s, stats).bit == 0) {
                return 1;
            }
        }
    }
    return 0;
}

int Decider::coarse_pixel_value(int n, const ComplexDyadic& z) const
{
    if (n >= n0_) {
        throw std::invalid_argument("coarse_pixel_value needs n < n0");
    }
    const BoxCover& ja = cert_->julia_approx;
    if (ja.contains(z)) {
        return 1;
    }
    const Dyadic bound = Dyadic::pow2(-n - 2) + cert_->eps.value;
    return ja.dist_lower(z) <= bound ? 1 : 0;
}

Verdict subprogram(const Certificate& cert, const MapSpec& map, int n, const ComplexDyadic& z)
{
    return Decider(cert, map).subprogram(n, z);
}

Verdict decide_far_outside_U(const Certificate& cert, const MapSpec& map, int n, const ComplexDyadic& z)
{
    return Decider(cert, map).decide_far_outside_U(n, z);
}

int pixel_value(const Certificate& cert, const MapSpec& map, int n, const ComplexDyadic& z)
{
    return Decider(cert, map).pixel_value(n, z);
}

int coarse_pixel_value(const Certificate& cert, const MapSpec& map, int n, const ComplexDyadic& z)
{
    return Decider(cert, map).coarse_pixel_value(n, z);
}

} // namespace certjulia
