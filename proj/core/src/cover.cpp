#include "certjulia/cover.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "certjulia/error.hpp"
#include "certjulia/map.hpp"
#include "fast_ball.hpp"

namespace certjulia {

namespace {

const std::vector<BoxCover::Run> kEmptyRow;

void merge_runs(std::vector<BoxCover::Run>& runs)
{
    if (runs.size() < 2) {
        return;
    }
    std::sort(runs.begin(), runs.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
    std::size_t out = 0;
    for (std::size_t i = 1; i < runs.size(); ++i) {
        if (runs[i].lo <= runs[out].hi + 1) {
            runs[out].hi = std::max(runs[out].hi, runs[i].hi);
        } else {
            runs[++out] = runs[i];
        }
    }
    runs.resize(out + 1);
}

// Candidate box indices containing coordinate X (in box units) on a closed grid.
std::pair<long, long> cells_of(const Dyadic& X)
{
    const mpz_class f = X.floor();
    const long lo = f.get_si();
    if (X.is_integer()) {
        return {lo - 1, lo};
    }
    return {lo, lo};
}

} // namespace

void ValidationReport::add(std::string name, bool pass, std::string witness)
{
    checks.push_back({std::move(name), pass, std::move(witness)});
}

bool ValidationReport::overall() const
{
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const ValidationReport::Check* ValidationReport::find(const std::string& name) const
{
    for (const auto& c : checks) {
        if (c.name == name) {
            return &c;
        }
    }
    return nullptr;
}

std::string ValidationReport::to_text() const
{
    std::ostringstream os;
    for (const auto& c : checks) {
        os << (c.pass ? "pass " : "FAIL ") << c.name;
        if (!c.witness.empty()) {
            os << ": " << c.witness;
        }
        os << '\n';
    }
    for (const auto& a : assumptions) {
        os << "assumes " << a << '\n';
    }
    os << "overall " << (overall() ? "pass" : "FAIL") << '\n';
    return os.str();
}

void ValidationReport::merge(const ValidationReport& other)
{
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
    assumptions.insert(assumptions.end(), other.assumptions.begin(), other.assumptions.end());
}

Dyadic BoxCover::half_diagonal() const
{
    // sqrt(2)/2 < 11587/16384
    return Dyadic::from_parts(11587, -14 - m_);
}

std::vector<BoxCover::Run>& BoxCover::row_mut(long iy)
{
    if (rows_.empty()) {
        iy0_ = iy;
        rows_.emplace_back();
        return rows_.front();
    }
    if (iy < iy0_) {
        rows_.insert(rows_.begin(), static_cast<std::size_t>(iy0_ - iy), {});
        iy0_ = iy;
    } else if (iy > row_max()) {
        rows_.resize(static_cast<std::size_t>(iy - iy0_ + 1));
    }
    return rows_[static_cast<std::size_t>(iy - iy0_)];
}

const std::vector<BoxCover::Run>& BoxCover::row(long iy) const
{
    if (rows_.empty() || iy < iy0_ || iy > row_max()) {
        return kEmptyRow;
    }
    return rows_[static_cast<std::size_t>(iy - iy0_)];
}

void BoxCover::recount()
{
    count_ = 0;
    for (const auto& r : rows_) {
        for (const auto& run : r) {
            count_ += static_cast<std::size_t>(run.hi - run.lo + 1);
        }
    }
}

void BoxCover::add_run(long iy, long lo, long hi)
{
    if (hi < lo) {
        return;
    }
    auto& r = row_mut(iy);
    // fast path for the common append
    auto it = std::lower_bound(r.begin(), r.end(), lo, [](const Run& a, long v) { return a.hi + 1 < v; });
    if (it != r.end() && it->lo <= hi + 1) {
        const long before = it->hi - it->lo + 1;
        it->lo = std::min(it->lo, lo);
        it->hi = std::max(it->hi, hi);
        count_ -= static_cast<std::size_t>(before);
        // absorb followers
        auto next = it + 1;
        while (next != r.end() && next->lo <= it->hi + 1) {
            count_ -= static_cast<std::size_t>(next->hi - next->lo + 1);
            it->hi = std::max(it->hi, next->hi);
            ++next;
        }
        r.erase(it + 1, next);
        count_ += static_cast<std::size_t>(it->hi - it->lo + 1);
        return;
    }
    r.insert(it, Run{lo, hi});
    count_ += static_cast<std::size_t>(hi - lo + 1);
}

void BoxCover::add_box(long ix, long iy)
{
    add_run(iy, ix, ix);
}

void BoxCover::add_point(double x, double y)
{
    add_box(static_cast<long>(std::floor(std::ldexp(x, m_))), static_cast<long>(std::floor(std::ldexp(y, m_))));
}

void BoxCover::add_point(const ComplexDyadic& z)
{
    add_box(z.re.mul_2exp(m_).floor().get_si(), z.im.mul_2exp(m_).floor().get_si());
}

long BoxCover::col_min() const
{
    long v = std::numeric_limits<long>::max();
    for (const auto& r : rows_) {
        if (!r.empty()) {
            v = std::min(v, r.front().lo);
        }
    }
    return v;
}

long BoxCover::col_max() const
{
    long v = std::numeric_limits<long>::min();
    for (const auto& r : rows_) {
        if (!r.empty()) {
            v = std::max(v, r.back().hi);
        }
    }
    return v;
}

bool BoxCover::contains_box(long ix, long iy) const
{
    const auto& r = row(iy);
    auto it = std::lower_bound(r.begin(), r.end(), ix, [](const Run& a, long v) { return a.hi < v; });
    return it != r.end() && it->lo <= ix;
}

bool BoxCover::contains(const ComplexDyadic& z) const
{
    if (empty()) {
        return false;
    }
    const auto [x0, x1] = cells_of(z.re.mul_2exp(m_));
    const auto [y0, y1] = cells_of(z.im.mul_2exp(m_));
    for (long iy = y0; iy <= y1; ++iy) {
        for (long ix = x0; ix <= x1; ++ix) {
            if (contains_box(ix, iy)) {
                return true;
            }
        }
    }
    return false;
}

bool BoxCover::contains(double x, double y) const
{
    if (empty() || !std::isfinite(x) || !std::isfinite(y)) {
        return false;
    }
    // scaling by 2^m is exact
    const double X = std::ldexp(x, m_);
    const double Y = std::ldexp(y, m_);
    if (std::fabs(X) > 1e15 || std::fabs(Y) > 1e15) {
        return false;
    }
    const double fx = std::floor(X);
    const double fy = std::floor(Y);
    const long x1 = static_cast<long>(fx);
    const long y1 = static_cast<long>(fy);
    const long x0 = fx == X ? x1 - 1 : x1;
    const long y0 = fy == Y ? y1 - 1 : y1;
    for (long iy = y0; iy <= y1; ++iy) {
        for (long ix = x0; ix <= x1; ++ix) {
            if (contains_box(ix, iy)) {
                return true;
            }
        }
    }
    return false;
}

double BoxCover::search(double X, double Y, double cap2, std::vector<std::pair<long, Run>>* near) const
{
    double best = cap2;
    if (rows_.empty()) {
        return best;
    }
    auto gap = [](double v, double lo, double hi) { return v < lo ? lo - v : (v > hi ? v - hi : 0.0); };
    auto visit_row = [&](long iy) {
        const auto& r = row(iy);
        if (r.empty()) {
            return;
        }
        const double gy = gap(Y, static_cast<double>(iy), static_cast<double>(iy) + 1.0);
        const double gy2 = gy * gy;
        if (gy2 > best * (1 + 1e-9) + 1e-9) {
            return;
        }
        auto it = std::lower_bound(r.begin(), r.end(), X, [](const Run& a, double v) {
            return static_cast<double>(a.hi) + 1.0 < v;
        });
        auto consider = [&](const Run& run) {
            const double gx = gap(X, static_cast<double>(run.lo), static_cast<double>(run.hi) + 1.0);
            const double d2 = gx * gx + gy2;
            if (d2 < best) {
                best = d2;
            }
            if (near != nullptr && d2 <= best * (1 + 1e-9) + 1e-9) {
                near->emplace_back(iy, run);
            }
        };
        if (it != r.end()) {
            consider(*it);
        }
        if (it != r.begin()) {
            consider(*(it - 1));
        }
    };
    const long yc = static_cast<long>(std::floor(std::clamp(Y, static_cast<double>(iy0_ - 1),
                                                            static_cast<double>(row_max() + 1))));
    visit_row(yc);
    for (long k = 1;; ++k) {
        const long a = yc - k;
        const long b = yc + k;
        if (a < iy0_ && b > row_max()) {
            break;
        }
        // rows beyond vertical gap sqrt(best) cannot improve
        const double inf = std::numeric_limits<double>::infinity();
        const double ga = a >= iy0_ ? std::max(Y - (static_cast<double>(a) + 1.0), 0.0) : inf;
        const double gb = b <= row_max() ? std::max(static_cast<double>(b) - Y, 0.0) : inf;
        const double g = std::min(ga, gb);
        if (g * g > best * (1 + 1e-9) + 1e-9) {
            break;
        }
        if (a >= iy0_) {
            visit_row(a);
        }
        if (b <= row_max()) {
            visit_row(b);
        }
    }
    if (near != nullptr) {
        const double lim = best * (1 + 1e-9) + 1e-9;
        std::vector<std::pair<long, Run>> keep;
        for (const auto& [iy, run] : *near) {
            const double gy = gap(Y, static_cast<double>(iy), static_cast<double>(iy) + 1.0);
            const double gx = gap(X, static_cast<double>(run.lo), static_cast<double>(run.hi) + 1.0);
            if (gx * gx + gy * gy <= lim) {
                keep.emplace_back(iy, run);
            }
        }
        near->swap(keep);
    }
    return best;
}

namespace {

// exact squared gap from X to the closed interval [lo, hi + 1]
Dyadic exact_gap(const Dyadic& X, long lo, long hi_plus_one)
{
    if (X < Dyadic(lo)) {
        return Dyadic(lo) - X;
    }
    if (X > Dyadic(hi_plus_one)) {
        return X - Dyadic(hi_plus_one);
    }
    return Dyadic();
}

} // namespace

Dyadic BoxCover::dist_lower(const ComplexDyadic& z) const
{
    if (contains(z)) {
        throw PointInsideCover();
    }
    if (empty()) {
        throw std::invalid_argument("dist_lower on an empty cover");
    }
    const Dyadic X = z.re.mul_2exp(m_);
    const Dyadic Y = z.im.mul_2exp(m_);
    std::vector<std::pair<long, Run>> near;
    search(X.to_double(), Y.to_double(), std::numeric_limits<double>::infinity(), &near);
    Dyadic best2;
    bool have = false;
    for (const auto& [iy, run] : near) {
        const Dyadic gx = exact_gap(X, run.lo, run.hi + 1);
        const Dyadic gy = exact_gap(Y, iy, iy + 1);
        Dyadic d2 = gx * gx + gy * gy;
        if (!have || d2 < best2) {
            best2 = std::move(d2);
            have = true;
        }
    }
    return Dyadic::sqrt(best2, 10, Round::kDown).mul_2exp(-m_);
}

Dyadic BoxCover::dist_upper(const ComplexDyadic& z) const
{
    if (contains(z)) {
        return Dyadic();
    }
    if (empty()) {
        throw std::invalid_argument("dist_upper on an empty cover");
    }
    const Dyadic X = z.re.mul_2exp(m_);
    const Dyadic Y = z.im.mul_2exp(m_);
    std::vector<std::pair<long, Run>> near;
    search(X.to_double(), Y.to_double(), std::numeric_limits<double>::infinity(), &near);
    Dyadic best2;
    bool have = false;
    for (const auto& [iy, run] : near) {
        const Dyadic gx = exact_gap(X, run.lo, run.hi + 1);
        const Dyadic gy = exact_gap(Y, iy, iy + 1);
        Dyadic d2 = gx * gx + gy * gy;
        if (!have || d2 < best2) {
            best2 = std::move(d2);
            have = true;
        }
    }
    return Dyadic::sqrt(best2, 10, Round::kUp).mul_2exp(-m_);
}

double BoxCover::dist_lower_fast(double x, double y, double cap) const
{
    if (contains(x, y)) {
        return 0.0;
    }
    if (empty()) {
        return cap;
    }
    const double X = std::ldexp(x, m_);
    const double Y = std::ldexp(y, m_);
    const double capu = std::ldexp(cap, m_);
    const double best = search(X, Y, capu * capu, nullptr);
    return std::ldexp(std::sqrt(best), -m_) * (1.0 - 0x1p-46);
}

double BoxCover::dist_upper_fast(double x, double y) const
{
    if (contains(x, y)) {
        return 0.0;
    }
    const double X = std::ldexp(x, m_);
    const double Y = std::ldexp(y, m_);
    const double best = search(X, Y, std::numeric_limits<double>::infinity(), nullptr);
    return detail::up(std::ldexp(std::sqrt(best), -m_) * (1.0 + 0x1p-46));
}

BoxCover BoxCover::inflate(const Dyadic& t) const
{
    if (t.sign() < 0) {
        throw std::invalid_argument("inflate by a negative amount");
    }
    return inflate_boxes(t.mul_2exp(m_).ceil().get_si());
}

BoxCover BoxCover::inflate_boxes(long k) const
{
    if (k <= 0) {
        return *this;
    }
    // widths[|dy|]: boxes within Euclidean gap < k of a box at vertical offset dy
    std::vector<long> widths(static_cast<std::size_t>(k + 2), -1);
    for (long dy = 0; dy <= k + 1; ++dy) {
        const long gy = std::max<long>(dy - 1, 0);
        if (gy >= k) {
            continue;
        }
        const long s2 = k * k - gy * gy;
        auto s = static_cast<long>(std::sqrt(static_cast<double>(s2)));
        while (s * s > s2) {
            --s;
        }
        while ((s + 1) * (s + 1) <= s2) {
            ++s;
        }
        widths[static_cast<std::size_t>(dy)] = (s * s == s2) ? s : s + 1;
    }
    BoxCover out(m_);
    if (rows_.empty()) {
        return out;
    }
    const long lo_row = iy0_ - k - 1;
    const long n = static_cast<long>(rows_.size()) + 2 * (k + 1);
    std::vector<std::vector<Run>> acc(static_cast<std::size_t>(n));
    for (long i = 0; i < static_cast<long>(rows_.size()); ++i) {
        const auto& r = rows_[static_cast<std::size_t>(i)];
        if (r.empty()) {
            continue;
        }
        const long iy = iy0_ + i;
        for (long dy = -(k + 1); dy <= k + 1; ++dy) {
            const long w = widths[static_cast<std::size_t>(std::labs(dy))];
            if (w < 0) {
                continue;
            }
            auto& dst = acc[static_cast<std::size_t>(iy + dy - lo_row)];
            for (const auto& run : r) {
                dst.push_back({run.lo - w, run.hi + w});
            }
        }
    }
    for (long i = 0; i < n; ++i) {
        auto& r = acc[static_cast<std::size_t>(i)];
        if (r.empty()) {
            continue;
        }
        merge_runs(r);
        for (const auto& run : r) {
            out.add_run(lo_row + i, run.lo, run.hi);
        }
    }
    return out;
}

BoxCover BoxCover::at_resolution(int m) const
{
    if (m == m_) {
        return *this;
    }
    BoxCover out(m);
    if (m > m_) {
        const long f = 1L << (m - m_);
        for (long i = 0; i < static_cast<long>(rows_.size()); ++i) {
            for (const auto& run : rows_[static_cast<std::size_t>(i)]) {
                for (long s = 0; s < f; ++s) {
                    out.add_run((iy0_ + i) * f + s, run.lo * f, (run.hi + 1) * f - 1);
                }
            }
        }
        return out;
    }
    const int sh = m_ - m;
    auto coarse = [sh](long v) { return v >> sh; }; // arithmetic shift floors
    for (long i = 0; i < static_cast<long>(rows_.size()); ++i) {
        for (const auto& run : rows_[static_cast<std::size_t>(i)]) {
            out.add_run(coarse(iy0_ + i), coarse(run.lo), coarse(run.hi));
        }
    }
    return out;
}

bool BoxCover::subset_of(const BoxCover& other) const
{
    if (other.m_ < m_) {
        // refining the other side is exact
        return subset_of(other.at_resolution(m_));
    }
    const BoxCover self = at_resolution(other.m_);
    for (long i = 0; i < static_cast<long>(self.rows_.size()); ++i) {
        const auto& o = other.row(self.iy0_ + i);
        for (const auto& run : self.rows_[static_cast<std::size_t>(i)]) {
            auto it = std::lower_bound(o.begin(), o.end(), run.lo, [](const Run& a, long v) { return a.hi < v; });
            if (it == o.end() || it->lo > run.lo || it->hi < run.hi) {
                return false;
            }
        }
    }
    return true;
}

Dyadic BoxCover::diameter() const
{
    if (empty()) {
        return Dyadic();
    }
    long first = row_max();
    long last = row_min();
    for (long iy = row_min(); iy <= row_max(); ++iy) {
        if (!row(iy).empty()) {
            first = std::min(first, iy);
            last = std::max(last, iy);
        }
    }
    const Dyadic w = Dyadic(col_max() - col_min() + 1).mul_2exp(-m_);
    const Dyadic h = Dyadic(last - first + 1).mul_2exp(-m_);
    return Dyadic::sqrt(w * w + h * h, m_ + 4, Round::kUp);
}

ComplexDyadic BoxCover::box_center(long ix, long iy) const
{
    return {Dyadic(2 * ix + 1).mul_2exp(-m_ - 1), Dyadic(2 * iy + 1).mul_2exp(-m_ - 1)};
}

void BoxCover::for_each_box(const std::function<void(long, long)>& fn) const
{
    for (long i = 0; i < static_cast<long>(rows_.size()); ++i) {
        for (const auto& run : rows_[static_cast<std::size_t>(i)]) {
            for (long ix = run.lo; ix <= run.hi; ++ix) {
                fn(ix, iy0_ + i);
            }
        }
    }
}

std::string BoxCover::serialize() const
{
    std::ostringstream os;
    os << "certjulia-cover 1\n";
    os << "resolution " << m_ << '\n';
    std::size_t nonempty = 0;
    for (const auto& r : rows_) {
        nonempty += r.empty() ? 0 : 1;
    }
    if (empty()) {
        os << "bbox 0 0 -1 -1\n";
    } else {
        long first = row_max();
        long last = row_min();
        for (long iy = row_min(); iy <= row_max(); ++iy) {
            if (!row(iy).empty()) {
                first = std::min(first, iy);
                last = std::max(last, iy);
            }
        }
        os << "bbox " << col_min() << ' ' << first << ' ' << col_max() << ' ' << last << '\n';
    }
    os << "rows " << nonempty << '\n';
    for (long i = 0; i < static_cast<long>(rows_.size()); ++i) {
        const auto& r = rows_[static_cast<std::size_t>(i)];
        if (r.empty()) {
            continue;
        }
        os << (iy0_ + i) << ' ' << r.size();
        for (const auto& run : r) {
            os << ' ' << run.lo << ' ' << (run.hi - run.lo + 1);
        }
        os << '\n';
    }
    return os.str();
}

BoxCover BoxCover::parse(const std::string& text)
{
    std::istringstream is(text);
    std::string tag;
    int version = 0;
    if (!(is >> tag >> version) || tag != "certjulia-cover" || version != 1) {
        throw ParseError("not a certjulia cover file");
    }
    auto expect = [&](const char* key) {
        std::string k;
        if (!(is >> k) || k != key) {
            throw ParseError(std::string("cover file: expected ") + key);
        }
    };
    int m = 0;
    expect("resolution");
    is >> m;
    long bx0, by0, bx1, by1;
    expect("bbox");
    is >> bx0 >> by0 >> bx1 >> by1;
    std::size_t nrows = 0;
    expect("rows");
    is >> nrows;
    if (!is) {
        throw ParseError("cover file: bad header");
    }
    BoxCover c(m);
    for (std::size_t i = 0; i < nrows; ++i) {
        long iy = 0;
        std::size_t nruns = 0;
        if (!(is >> iy >> nruns)) {
            throw ParseError("cover file: truncated row");
        }
        for (std::size_t k = 0; k < nruns; ++k) {
            long start = 0;
            long len = 0;
            if (!(is >> start >> len) || len <= 0) {
                throw ParseError("cover file: bad run");
            }
            c.add_run(iy, start, start + len - 1);
        }
    }
    if (!c.empty() && (c.col_min() != bx0 || c.col_max() != bx1)) {
        throw ParseError("cover file: bounding box does not match rows");
    }
    return c;
}

void BoxCover::save(const std::string& path) const
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write cover file " + path);
    }
    out << serialize();
}

BoxCover BoxCover::load(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open cover file " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

bool operator==(const BoxCover& a, const BoxCover& b)
{
    if (a.m_ != b.m_ || a.count_ != b.count_) {
        return false;
    }
    const long lo = std::min(a.row_min(), b.row_min());
    const long hi = std::max(a.row_max(), b.row_max());
    for (long iy = lo; iy <= hi; ++iy) {
        if (a.row(iy) != b.row(iy)) {
            return false;
        }
    }
    return true;
}

ValidationReport validate_Ucond(const MapSpec& map, const BoxCover& U, const BoxCover& julia_approx,
                                const Dyadic& eps, const Dyadic& r, const UcondOptions& opt)
{
    ValidationReport rep;
    if (eps.sign() < 0 || r.sign() <= 0) {
        rep.add("Ucond parameters", false, "eps must be >= 0 and r > 0");
        return rep;
    }
    const detail::FastMap fm(map);
    const BoxCover grown = U.inflate(eps);
    const double half = U.half_diagonal().to_double(Round::kUp);
    const double slack = opt.julia_slack.to_double(Round::kUp);
    const double limit = (r * (Dyadic(1) - opt.margin)).to_double(Round::kDown);
    const BoxCover ja = julia_approx.at_resolution(julia_approx.resolution());
    std::size_t bad = 0;
    double worst = 0;
    std::string witness;
    grown.for_each_box([&](long ix, long iy) {
        const ComplexDyadic c = grown.box_center(ix, iy);
        const detail::FBall b{c.re.to_double(), c.im.to_double(), half};
        detail::FBall img;
        double reach = std::numeric_limits<double>::infinity();
        if (fm.f(b, img)) {
            reach = detail::up(ja.dist_upper_fast(img.x, img.y) + img.r + slack);
        }
        worst = std::max(worst, reach);
        if (!(reach <= limit)) {
            if (static_cast<int>(bad) < opt.max_witnesses) {
                std::ostringstream os;
                os << " box(" << ix << "," << iy << ") reach " << reach;
                witness += os.str();
            }
            ++bad;
        }
    });
    {
        std::ostringstream os;
        os << bad << " of " << grown.box_count() << " boxes of U_eps(U) map outside U_r(J)";
        os << "; worst reach " << worst << " vs r " << r.to_double();
        if (bad > 0) {
            os << ";" << witness;
        }
        rep.add("f(U_eps(U)) within U_r(J)", bad == 0, os.str());
    }
    {
        const BoxCover need = julia_approx.inflate(eps.mul_2exp(1));
        const bool ok = need.subset_of(U);
        std::string w;
        if (!ok) {
            const BoxCover need_m = need.at_resolution(U.resolution());
            std::size_t miss = 0;
            need_m.for_each_box([&](long ix, long iy) {
                if (!U.contains_box(ix, iy)) {
                    if (miss < 5) {
                        w += " box(" + std::to_string(ix) + "," + std::to_string(iy) + ")";
                    }
                    ++miss;
                }
            });
            w = std::to_string(miss) + " boxes of U_2eps(JA) missing from U:" + w;
        }
        rep.add("U_2eps(J) within U", ok, w);
    }
    rep.assumptions.push_back("J is contained in the Julia approximation");
    rep.assumptions.push_back("the Julia approximation lies within " + opt.julia_slack.to_decimal() + " of J");
    return rep;
}

BoxCover build_cover_inverse_iteration(const MapSpec& map, int depth, int m, const ComplexDyadic& seed)
{
    if (depth < 0 || depth > 26) {
        throw std::invalid_argument("inverse iteration depth out of range");
    }
    constexpr std::size_t kMaxPoints = std::size_t{1} << 28;
    BoxCover c(m);
    c.add_point(seed);
    // Full tree down to `depth`, then only through boxes not seen before, until
    // closure.  The second phase reaches parts of J that carry little harmonic
    // measure, such as thin branches of dendrites.
    const std::complex<double> z0{seed.re.to_double(), seed.im.to_double()};
    std::deque<std::pair<std::complex<double>, int>> queue{{z0, 0}};
    std::size_t processed = 0;
    auto checked_preimages = [&](std::complex<double> z) {
        auto ws = preimages(map, z);
        for (const auto& w : ws) {
            if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) {
                throw RootFindingFailure("non-finite preimage");
            }
        }
        return ws;
    };
    // adds the box of w, true if it was new
    auto visit = [&](std::complex<double> w) {
        const long ix = static_cast<long>(std::floor(std::ldexp(w.real(), m)));
        const long iy = static_cast<long>(std::floor(std::ldexp(w.imag(), m)));
        if (c.contains_box(ix, iy)) {
            return false;
        }
        c.add_box(ix, iy);
        return true;
    };
    auto close_up = [&] {
        while (!queue.empty()) {
            const auto [z, level] = queue.front();
            queue.pop_front();
            if (++processed > kMaxPoints) {
                throw RootFindingFailure("inverse iteration did not close up");
            }
            for (const auto& w : checked_preimages(z)) {
                if (visit(w) || level + 1 < depth) {
                    queue.emplace_back(w, level + 1);
                }
            }
        }
    };
    close_up();
    // One representative per box thins out near critical points, where
    // preimages spread.  Random backward orbits follow harmonic measure
    // instead; any box they find seeds another closure.
    std::mt19937_64 rng(0x5eed);
    constexpr int kOrbits = 1 << 14;
    constexpr int kOrbitDepth = 48;
    for (int k = 0; k < kOrbits; ++k) {
        std::complex<double> z = z0;
        for (int step = 0; step < kOrbitDepth; ++step) {
            const auto ws = checked_preimages(z);
            z = ws[rng() % ws.size()];
            if (visit(z)) {
                queue.emplace_back(z, depth);
            }
        }
        close_up();
    }
    return c;
}

} // namespace certjulia
