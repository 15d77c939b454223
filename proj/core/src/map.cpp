#include "certjulia/map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "certjulia/cover.hpp"
#include "certjulia/error.hpp"

namespace certjulia {

using json = nlohmann::json;

namespace {

std::vector<CoefficientOracle> exact_coeffs(const std::vector<ComplexDyadic>& c)
{
    std::vector<CoefficientOracle> out;
    out.reserve(c.size());
    for (const auto& z : c) {
        out.push_back(CoefficientOracle::exact(z));
    }
    return out;
}

std::vector<CoefficientOracle> parse_coeffs(const json& arr)
{
    std::vector<CoefficientOracle> out;
    for (const auto& c : arr) {
        if (c.is_string()) {
            out.push_back(CoefficientOracle::decimal(c.get<std::string>(), "0"));
        } else if (c.is_array() && c.size() == 2) {
            out.push_back(CoefficientOracle::decimal(c[0].get<std::string>(), c[1].get<std::string>()));
        } else {
            throw ParseError("map coefficient must be \"re\" or [\"re\", \"im\"]");
        }
    }
    return out;
}

json dump_coeffs(const std::vector<CoefficientOracle>& cs)
{
    json arr = json::array();
    for (const auto& c : cs) {
        arr.push_back(json::array({c.re_text(), c.im_text()}));
    }
    return arr;
}

std::complex<double> approx(const CoefficientOracle& c)
{
    const ComplexDyadic q = c.query(64);
    return {q.re.to_double(), q.im.to_double()};
}

bool surely_zero(const CoefficientOracle& c)
{
    return c.is_exact() && c.exact_value()->re.is_zero() && c.exact_value()->im.is_zero();
}

} // namespace

MapSpec MapSpec::polynomial(const std::vector<ComplexDyadic>& coeffs, std::string name)
{
    MapSpec m;
    m.kind = MapKind::kPolynomial;
    m.degree = static_cast<int>(coeffs.size()) - 1;
    m.numerator = exact_coeffs(coeffs);
    m.name = std::move(name);
    m.check();
    return m;
}

MapSpec MapSpec::rational(const std::vector<ComplexDyadic>& num, const std::vector<ComplexDyadic>& den,
                          std::string name)
{
    MapSpec m;
    m.kind = MapKind::kRational;
    m.numerator = exact_coeffs(num);
    m.denominator = exact_coeffs(den);
    m.degree = static_cast<int>(std::max(num.size(), den.size())) - 1;
    m.name = std::move(name);
    m.check();
    return m;
}

void MapSpec::check() const
{
    if (numerator.empty()) {
        throw ParseError("map has no numerator coefficients");
    }
    if (degree < 2) {
        throw ParseError("map degree must be at least 2");
    }
    if (is_polynomial()) {
        if (!denominator.empty()) {
            throw ParseError("polynomial map with a denominator");
        }
        if (static_cast<int>(numerator.size()) != degree + 1) {
            throw ParseError("polynomial degree does not match coefficient count");
        }
        if (surely_zero(numerator.back())) {
            throw ParseError("leading coefficient is zero");
        }
    } else {
        if (denominator.empty()) {
            throw ParseError("rational map without a denominator");
        }
        const int d = static_cast<int>(std::max(numerator.size(), denominator.size())) - 1;
        if (d != degree) {
            throw ParseError("rational degree does not match coefficient count");
        }
    }
}

MapSpec MapSpec::from_json(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("map file: ") + e.what());
    }
    MapSpec m;
    const std::string kind = j.value("kind", "polynomial");
    if (kind == "polynomial") {
        m.kind = MapKind::kPolynomial;
    } else if (kind == "rational") {
        m.kind = MapKind::kRational;
    } else {
        throw ParseError("unknown map kind: " + kind);
    }
    m.numerator = parse_coeffs(j.at("numerator"));
    if (j.contains("denominator")) {
        m.denominator = parse_coeffs(j.at("denominator"));
    }
    m.degree = j.value("degree", static_cast<int>(m.numerator.size()) - 1);
    m.name = j.value("name", "");
    m.check();
    return m;
}

MapSpec MapSpec::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open map file " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::string MapSpec::to_json() const
{
    json j;
    if (!name.empty()) {
        j["name"] = name;
    }
    j["kind"] = is_polynomial() ? "polynomial" : "rational";
    j["degree"] = degree;
    j["numerator"] = dump_coeffs(numerator);
    j["denominator"] = dump_coeffs(denominator);
    return j.dump(2);
}

std::vector<std::complex<double>> MapSpec::numerator_approx() const
{
    std::vector<std::complex<double>> out;
    for (const auto& c : numerator) {
        out.push_back(approx(c));
    }
    return out;
}

std::vector<std::complex<double>> MapSpec::denominator_approx() const
{
    std::vector<std::complex<double>> out;
    for (const auto& c : denominator) {
        out.push_back(approx(c));
    }
    return out;
}

MapEvaluator::MapEvaluator(const MapSpec& map, long work_bits) : map_(&map), w_(work_bits)
{
    const auto bits = static_cast<unsigned>(std::max<long>(work_bits + 4, 8));
    for (const auto& c : map.numerator) {
        num_.push_back(c.ball(bits));
    }
    for (const auto& c : map.denominator) {
        den_.push_back(c.ball(bits));
    }
}

std::pair<Ball, Ball> MapEvaluator::horner(const std::vector<Ball>& c, const Ball& z) const
{
    Ball p = c.back();
    Ball dp;
    for (std::size_t k = c.size() - 1; k-- > 0;) {
        dp = ball_add(ball_mul(dp, z, w_), p, w_);
        p = ball_add(ball_mul(p, z, w_), c[k], w_);
    }
    return {p, dp};
}

std::pair<Ball, Ball> MapEvaluator::f_df(const Ball& z) const
{
    auto [n, dn] = horner(num_, z);
    if (map_->is_polynomial()) {
        return {n, dn};
    }
    auto [d, dd] = horner(den_, z);
    if (d.contains_zero()) {
        throw DenominatorVanishes();
    }
    const Ball inv = ball_inv(d, w_ + 8);
    Ball fz = ball_mul(n, inv, w_);
    const Ball num = ball_sub(ball_mul(dn, d, w_ + 8), ball_mul(n, dd, w_ + 8), w_ + 8);
    Ball dfz = ball_mul(num, ball_mul(inv, inv, w_ + 8), w_);
    return {fz, dfz};
}

Ball MapEvaluator::f(const Ball& z) const
{
    return f_df(z).first;
}

Ball MapEvaluator::df(const Ball& z) const
{
    return f_df(z).second;
}

Ball eval_f(const MapSpec& map, const Ball& z, long work_bits)
{
    return MapEvaluator(map, work_bits).f(z);
}

Ball eval_df(const MapSpec& map, const Ball& z, long work_bits)
{
    return MapEvaluator(map, work_bits).df(z);
}

long target_bits(const Dyadic& target)
{
    if (target.sign() <= 0) {
        throw std::invalid_argument("precision target must be positive");
    }
    return std::max<long>(0, -target.msb());
}

long schedule_work_bits(const Dyadic& target, int i_max, const Dyadic& r_hat)
{
    const Dyadic x = r_hat + Dyadic(2);
    // ceil(log2 x) for x >= 2
    const bool pow2 = x.mantissa() == 1;
    const long lg = x.msb() + (pow2 ? 0 : 1);
    return target_bits(target) + static_cast<long>(i_max) * lg + 16;
}

std::vector<OrbitPoint> orbit_with_derivative(const MapSpec& map, const ComplexDyadic& z, int i_max,
                                              const Dyadic& target, const Dyadic& r_hat,
                                              const OrbitStop& stop, OrbitInfo* info)
{
    long w = schedule_work_bits(target, i_max, r_hat);
    const long abs_bits = target_bits(target) + 4;
    for (int attempt = 0; attempt < 5; ++attempt, w *= 2) {
        if (info != nullptr) {
            info->work_bits = w;
            info->attempts = attempt + 1;
        }
        const MapEvaluator ev(map, w);
        std::vector<OrbitPoint> out;
        Ball p(z);
        Ball dz(ComplexDyadic(Dyadic(1)));
        bool ok = true;
        for (int i = 1; i <= i_max; ++i) {
            std::pair<Ball, Ball> fd;
            try {
                fd = ev.f_df(p);
            } catch (const DenominatorVanishes&) {
                ok = false;
                break;
            }
            dz = ball_mul(dz, fd.second, w);
            p = std::move(fd.first);
            OrbitPoint pt;
            pt.index = i;
            pt.p = p;
            pt.dz = dz;
            auto ab = ball_abs_bounds(dz, abs_bits);
            pt.d_lo = std::move(ab.lo);
            pt.d_hi = std::move(ab.hi);
            if (p.radius > target || pt.d_hi - pt.d_lo > target) {
                ok = false;
                break;
            }
            out.push_back(std::move(pt));
            if (stop && stop(out.back())) {
                return out;
            }
        }
        if (ok) {
            return out;
        }
    }
    throw PrecisionExhausted("orbit of " + z.to_string() + " needs more than " + std::to_string(w / 2)
                             + " working bits");
}

Dyadic sup_df_on_cover(const MapSpec& map, const BoxCover& cover, const Dyadic& inflate_by)
{
    if (cover.empty()) {
        throw std::invalid_argument("sup_df_on_cover: empty cover");
    }
    const MapEvaluator ev(map, 64);
    const Dyadic side = cover.box_side();
    Dyadic best;
    // Split a box until the enclosure of f' is tight relative to its size.
    std::function<void(const ComplexDyadic&, const Dyadic&, int)> visit =
        [&](const ComplexDyadic& c, const Dyadic& half, int depth) {
            // half-diagonal of a square with half-side `half`, rounded up
            const Dyadic rad = cap_radius(half * Dyadic::from_parts(23171, -14) + inflate_by);
            const Ball d = ev.df(Ball(c, rad));
            const Dyadic hi = modulus_upper(d.center) + d.radius;
            if (hi <= best) {
                return;
            }
            const Dyadic tol = max(Dyadic(1), modulus_upper(d.center)).mul_2exp(-7);
            if (depth >= 4 || d.radius <= tol) {
                best = hi;
                return;
            }
            const Dyadic q = half.mul_2exp(-1);
            for (int sx = -1; sx <= 1; sx += 2) {
                for (int sy = -1; sy <= 1; sy += 2) {
                    visit({c.re + (sx < 0 ? -q : q), c.im + (sy < 0 ? -q : q)}, q, depth + 1);
                }
            }
        };
    cover.for_each_box([&](long ix, long iy) { visit(cover.box_center(ix, iy), side.mul_2exp(-1), 0); });
    return best.round_sig(32, Round::kUp);
}

namespace {

std::complex<double> poly_eval(const std::vector<std::complex<double>>& c, std::complex<double> w)
{
    std::complex<double> p = c.back();
    for (std::size_t k = c.size() - 1; k-- > 0;) {
        p = p * w + c[k];
    }
    return p;
}

} // namespace

std::vector<std::complex<double>> preimages(const MapSpec& map, std::complex<double> z)
{
    std::vector<std::complex<double>> c = map.numerator_approx();
    if (!map.is_polynomial()) {
        const auto d = map.denominator_approx();
        c.resize(std::max(c.size(), d.size()));
        for (std::size_t k = 0; k < d.size(); ++k) {
            c[k] -= z * d[k];
        }
    } else {
        c[0] -= z;
    }
    while (c.size() > 1 && std::abs(c.back()) == 0.0) {
        c.pop_back();
    }
    const std::size_t n = c.size() - 1;
    if (n == 0) {
        return {};
    }
    const std::complex<double> lead = c.back();
    for (auto& a : c) {
        a /= lead;
    }
    if (n == 1) {
        return {-c[0]};
    }
    if (n == 2) {
        // monic quadratic; pick the stable form
        const std::complex<double> b = c[1];
        const std::complex<double> disc = std::sqrt(b * b - 4.0 * c[0]);
        const std::complex<double> q = -0.5 * (b + (std::real(std::conj(b) * disc) >= 0 ? disc : -disc));
        if (std::abs(q) == 0.0) {
            return {0.0, 0.0};
        }
        return {q, c[0] / q};
    }
    double bound = 0;
    for (std::size_t k = 0; k < n; ++k) {
        bound = std::max(bound, std::abs(c[k]));
    }
    bound += 1;
    std::vector<std::complex<double>> r(n);
    const std::complex<double> seed(0.4, 0.9);
    for (std::size_t k = 0; k < n; ++k) {
        r[k] = bound * std::pow(seed, static_cast<double>(k));
    }
    for (int it = 0; it < 1000; ++it) {
        double delta = 0;
        for (std::size_t k = 0; k < n; ++k) {
            std::complex<double> den = 1;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != k) {
                    den *= r[k] - r[j];
                }
            }
            if (std::abs(den) == 0.0) {
                den = 1e-300;
            }
            const std::complex<double> step = poly_eval(c, r[k]) / den;
            r[k] -= step;
            delta = std::max(delta, std::abs(step));
        }
        if (delta < 1e-15 * bound) {
            return r;
        }
    }
    throw RootFindingFailure("Durand-Kerner did not converge for preimages of (" + std::to_string(z.real())
                             + ", " + std::to_string(z.imag()) + ")");
}

} // namespace certjulia
