#include "certjulia/certificate.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include <json.hpp>

#include "certjulia/decider.hpp"
#include "certjulia/error.hpp"
#include "certjulia/map.hpp"
#include "directed.hpp"
#include "fast_ball.hpp"

namespace certjulia {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(Provenance p)
{
    switch (p) {
    case Provenance::kRigorous:
        return "rigorous";
    case Provenance::kHeuristic:
        return "heuristic";
    case Provenance::kUserAsserted:
        break;
    }
    return "user-asserted";
}

Provenance provenance_from_string(const std::string& s)
{
    if (s == "rigorous") {
        return Provenance::kRigorous;
    }
    if (s == "heuristic") {
        return Provenance::kHeuristic;
    }
    if (s == "user-asserted") {
        return Provenance::kUserAsserted;
    }
    throw ParseError("unknown provenance tag: " + s);
}

int Certificate::n0() const
{
    // smallest n with 2^-n <= eps
    if (eps.value.sign() <= 0) {
        throw InvalidConstants("eps must be positive");
    }
    int n = 0;
    while (Dyadic::pow2(-n) > eps.value) {
        ++n;
    }
    return n;
}

namespace {

Constant read_constant(const json& j, const std::string& key, bool required = true)
{
    if (!j.contains(key)) {
        if (required) {
            throw ParseError("certificate: missing constant " + key);
        }
        return {};
    }
    const json& c = j.at(key);
    Constant out;
    if (c.is_string()) {
        out.value = Dyadic::parse(c.get<std::string>());
        return out;
    }
    out.value = Dyadic::parse(c.at("value").get<std::string>());
    out.provenance = provenance_from_string(c.value("provenance", "user-asserted"));
    out.note = c.value("note", "");
    return out;
}

json write_constant(const Constant& c)
{
    json j;
    j["value"] = c.value.to_string();
    j["decimal"] = c.value.to_decimal();
    j["provenance"] = to_string(c.provenance);
    if (!c.note.empty()) {
        j["note"] = c.note;
    }
    return j;
}

BoxCover read_cover(const json& j, const std::string& base_dir, std::string& file_out)
{
    if (j.contains("file")) {
        file_out = j.at("file").get<std::string>();
        fs::path p(file_out);
        if (p.is_relative()) {
            p = fs::path(base_dir) / p;
        }
        return BoxCover::load(p.string());
    }
    if (j.contains("inline")) {
        return BoxCover::parse(j.at("inline").get<std::string>());
    }
    throw ParseError("certificate cover needs \"file\" or \"inline\"");
}

} // namespace

Certificate Certificate::from_json(const std::string& text, const std::string& base_dir)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("certificate: ") + e.what());
    }
    if (j.value("format", "") != "certjulia-certificate/1") {
        throw ParseError("certificate: unsupported format tag");
    }
    Certificate c;
    c.name = j.value("name", "");
    c.map_file = j.value("map", "");
    const json& k = j.at("constants");
    c.lambda = read_constant(k, "lambda");
    c.r = read_constant(k, "r");
    c.mu = read_constant(k, "mu");
    c.eps = read_constant(k, "eps");
    c.K1 = read_constant(k, "K1");
    c.K2 = read_constant(k, "K2");
    c.C = read_constant(k, "C");
    c.alpha = read_constant(k, "alpha");
    c.beta = read_constant(k, "beta");
    c.R_hat = read_constant(k, "R_hat");
    c.julia_hausdorff = read_constant(k, "julia_hausdorff", false);
    if (k.contains("ce_C")) {
        c.ce_C = read_constant(k, "ce_C");
    }
    if (k.contains("ce_gamma")) {
        c.ce_gamma = read_constant(k, "ce_gamma");
    }
    c.U = read_cover(j.at("U"), base_dir, c.U_file);
    c.julia_approx = read_cover(j.at("julia_approx"), base_dir, c.julia_file);
    return c;
}

Certificate Certificate::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open certificate " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    const fs::path parent = fs::path(path).parent_path();
    return from_json(ss.str(), parent.empty() ? "." : parent.string());
}

std::string Certificate::to_json(bool inline_covers) const
{
    json j;
    j["format"] = "certjulia-certificate/1";
    if (!name.empty()) {
        j["name"] = name;
    }
    if (!map_file.empty()) {
        j["map"] = map_file;
    }
    json k;
    k["lambda"] = write_constant(lambda);
    k["r"] = write_constant(r);
    k["mu"] = write_constant(mu);
    k["eps"] = write_constant(eps);
    k["K1"] = write_constant(K1);
    k["K2"] = write_constant(K2);
    k["C"] = write_constant(C);
    k["alpha"] = write_constant(alpha);
    k["beta"] = write_constant(beta);
    k["R_hat"] = write_constant(R_hat);
    k["julia_hausdorff"] = write_constant(julia_hausdorff);
    if (ce_C) {
        k["ce_C"] = write_constant(*ce_C);
    }
    if (ce_gamma) {
        k["ce_gamma"] = write_constant(*ce_gamma);
    }
    j["constants"] = k;
    auto cover_json = [&](const BoxCover& c, const std::string& file) {
        json o;
        if (inline_covers || file.empty()) {
            o["inline"] = c.serialize();
        } else {
            o["file"] = file;
        }
        return o;
    };
    j["U"] = cover_json(U, U_file);
    j["julia_approx"] = cover_json(julia_approx, julia_file);
    return j.dump(2) + "\n";
}

void Certificate::save(const std::string& path) const
{
    const fs::path parent = fs::path(path).parent_path();
    const bool files = !U_file.empty() && !julia_file.empty();
    if (files) {
        U.save((parent / U_file).string());
        julia_approx.save((parent / julia_file).string());
    }
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write certificate " + path);
    }
    out << to_json(!files);
}

int L_of(const Dyadic& lambda, int n)
{
    if (!(lambda.sign() > 0 && lambda < Dyadic(1))) {
        throw InvalidConstants("lambda must lie in (0, 1)");
    }
    if (n < 0) {
        throw std::invalid_argument("L_of: n must be nonnegative");
    }
    const Dyadic bound = Dyadic::pow2(-(n + 1));
    Dyadic p(1);
    int k = 0;
    while (p > bound) {
        p = p * lambda;
        // rounding up only delays the stop, so L stays sound
        if (p.sig_bits() > 256) {
            p = p.round_sig(192, Round::kUp);
        }
        ++k;
    }
    return k + 1;
}

int L_of(const Certificate& cert, int n)
{
    return L_of(cert.lambda.value, n);
}

Dyadic C_pow_sqrt_up(const Dyadic& C, int i)
{
    if (i < 0) {
        throw std::invalid_argument("C_pow_sqrt_up: negative index");
    }
    if (C == Dyadic(1) || i == 0) {
        return Dyadic(1);
    }
    const auto s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(i))));
    if (s * s == i) {
        Dyadic p(1);
        for (int k = 0; k < s; ++k) {
            p = p * C;
        }
        return p;
    }
    const Dyadic root = detail::sqrt_directed(static_cast<unsigned long>(i), C >= Dyadic(1) ? Round::kUp : Round::kDown);
    return detail::pow_directed(C, root, Round::kUp);
}

Dyadic threshold(const Dyadic& K2, const Dyadic& C, int i, int n)
{
    if (i < 1) {
        throw std::invalid_argument("threshold: i must be >= 1");
    }
    return (K2 * C_pow_sqrt_up(C, i)).mul_2exp(n + 1) + Dyadic(1);
}

Dyadic threshold(const Certificate& cert, int i, int n)
{
    return threshold(cert.K2.value, cert.C.value, i, n);
}

Dyadic gap_K(const Certificate& cert, int n)
{
    const int L = L_of(cert, n);
    const Dyadic den = cert.K2.value * C_pow_sqrt_up(cert.C.value, L) + Dyadic(1);
    return Dyadic::div(cert.K1.value, den, 64, Round::kDown);
}

AlphaBeta derive_alpha_beta(const Dyadic& lambda, const Dyadic& r, const Dyadic& R_hat)
{
    if (R_hat <= Dyadic(1)) {
        throw InvalidConstants("R_hat must exceed 1");
    }
    if (!(lambda.sign() > 0 && lambda < Dyadic(1))) {
        throw InvalidConstants("lambda must lie in (0, 1)");
    }
    if (r.sign() <= 0) {
        throw InvalidConstants("r must be positive");
    }
    AlphaBeta out;
    // beta = ln(1/lambda) / ln(R_hat); exact when lambda^q R_hat^p = 1
    bool exact = false;
    for (int q = 1; q <= 16 && !exact; ++q) {
        Dyadic lq(1);
        for (int k = 0; k < q; ++k) {
            lq = lq * lambda;
        }
        Dyadic prod = lq;
        for (int p = 1; p <= 64; ++p) {
            prod = prod * R_hat;
            if (prod == Dyadic(1)) {
                const int g = std::gcd(p, q);
                const int pp = p / g;
                const int qq = q / g;
                if ((qq & (qq - 1)) == 0) {
                    out.beta = Dyadic(pp).mul_2exp(-std::countr_zero(static_cast<unsigned>(qq)));
                    exact = true;
                }
                break;
            }
            if (prod > Dyadic(1)) {
                break;
            }
        }
    }
    if (!exact) {
        out.beta = detail::log_quotient(Dyadic::div(Dyadic(1), lambda, 128, Round::kDown), R_hat,
                                        Round::kDown)
                       .round_sig(64, Round::kDown);
    }
    // alpha = 1 / (lambda r^beta): r^beta rounded toward making alpha larger
    const Dyadic rb = detail::pow_directed(r, out.beta, Round::kDown);
    out.alpha = Dyadic::div(Dyadic(1), lambda * rb, 64, Round::kUp);
    return out;
}

Dyadic derive_K1(const Dyadic& eps)
{
    if (eps.sign() <= 0) {
        throw InvalidConstants("eps must be positive");
    }
    return eps.mul_2exp(-2);
}

K2CEstimate estimate_K2_C(const MapSpec& map, const Certificate& partial, int sample_budget,
                          const EstimateOptions& opt)
{
    std::vector<std::complex<double>> cloud = opt.cloud;
    if (cloud.empty()) {
        partial.julia_approx.for_each_box([&](long ix, long iy) {
            const ComplexDyadic c = partial.julia_approx.box_center(ix, iy);
            cloud.emplace_back(c.re.to_double(), c.im.to_double());
        });
    }
    K2CEstimate est;
    if (sample_budget <= 0 || cloud.empty()) {
        throw InsufficientSamples("no samples requested");
    }
    const detail::FastMap fm(map);
    const double eps = partial.eps.value.to_double(Round::kDown);
    const int i_max = L_of(partial.lambda.value, std::max(opt.j_max, opt.n_ref)) + 8;
    std::mt19937_64 rng(opt.seed);
    std::uniform_int_distribution<std::size_t> pick(0, cloud.size() - 1);
    std::uniform_int_distribution<int> pick_j(opt.j_min, opt.j_max);
    std::uniform_int_distribution<int> pick_dir(0, 7);
    struct Sample {
        int k;
        double product;
    };
    std::vector<Sample> samples;
    for (int s = 0; s < sample_budget; ++s) {
        const auto c = cloud[pick(rng)];
        const int j = pick_j(rng);
        const double ang = M_PI / 4 * pick_dir(rng);
        const double step = std::ldexp(1.0, -j);
        const double x = c.real() + step * std::cos(ang);
        const double y = c.imag() + step * std::sin(ang);
        ++est.samples;
        if (!partial.U.contains(x, y)) {
            continue;
        }
        detail::FBall p{x, y, 0};
        detail::FBall d{1, 0, 0};
        for (int i = 1; i <= i_max; ++i) {
            detail::FBall fz;
            detail::FBall dfz;
            if (!fm.f_df(p, fz, dfz)) {
                break;
            }
            d = detail::fmul(d, dfz);
            p = fz;
            if (p.r > eps) {
                break;
            }
            if (!partial.U.contains(p.x, p.y)) {
                const double dist = opt.distance ? opt.distance(x, y) : step;
                const double dh = detail::abs_up(d.x, d.y) + d.r;
                samples.push_back({i, dist * dh});
                break;
            }
        }
    }
    est.exits = static_cast<int>(samples.size());
    if (est.exits < 10) {
        throw InsufficientSamples("only " + std::to_string(est.exits) + " exits observed");
    }
    est.min_product = samples.front().product;
    est.max_product = samples.front().product;
    for (const auto& s : samples) {
        est.min_product = std::min(est.min_product, s.product);
        est.max_product = std::max(est.max_product, s.product);
    }
    const int L_ref = L_of(partial.lambda.value, opt.n_ref);
    const double candidates[] = {1.0, 1.0625, 1.125, 1.25, 1.5, 2.0, 2.5, 3.0, 4.0};
    double best_cost = HUGE_VAL;
    double best_C = 1;
    double best_K2 = 0;
    for (double C : candidates) {
        double K2 = 0;
        for (const auto& s : samples) {
            K2 = std::max(K2, s.product / std::pow(C, std::sqrt(static_cast<double>(s.k))));
        }
        const double cost = K2 * std::pow(C, std::sqrt(static_cast<double>(L_ref)));
        if (cost < best_cost) {
            best_cost = cost;
            best_C = C;
            best_K2 = K2;
        }
    }
    est.C = Dyadic::from_double(best_C);
    est.K2 = Dyadic::from_double(best_K2 * opt.safety * (1 + 1e-9)).round_sig(8, Round::kUp);
    std::ostringstream os;
    os << "fitted from " << est.exits << " exits of " << est.samples << " samples; dist*|Df^k| in ["
       << est.min_product << ", " << est.max_product << "]; safety factor " << opt.safety;
    est.note = os.str();
    return est;
}

namespace {

// no zero of f' in the ball, decided by subdivision of the box
bool df_nonzero(const detail::FastMap& fm, double cx, double cy, double half, int depth)
{
    const detail::FBall b{cx, cy, detail::up(half * 1.41421357)};
    detail::FBall fz;
    detail::FBall dfz;
    if (fm.f_df(b, fz, dfz) && detail::abs_down(dfz.x, dfz.y) > dfz.r) {
        return true;
    }
    if (depth == 0) {
        return false;
    }
    const double q = half / 2;
    return df_nonzero(fm, cx - q, cy - q, q, depth - 1) && df_nonzero(fm, cx + q, cy - q, q, depth - 1)
           && df_nonzero(fm, cx - q, cy + q, q, depth - 1) && df_nonzero(fm, cx + q, cy + q, q, depth - 1);
}

} // namespace

ValidationReport validate(const Certificate& cert, const MapSpec& map)
{
    ValidationReport rep;
    const Dyadic one(1);
    auto range = [&](const std::string& name, bool ok, const Dyadic& v) {
        rep.add(name + " range", ok, ok ? std::string() : name + " = " + v.to_decimal());
    };
    range("lambda", cert.lambda.value.sign() > 0 && cert.lambda.value < one, cert.lambda.value);
    range("r", cert.r.value.sign() > 0, cert.r.value);
    range("mu", cert.mu.value.sign() > 0 && cert.mu.value < one, cert.mu.value);
    range("eps", cert.eps.value.sign() > 0 && cert.eps.value < cert.r.value, cert.eps.value);
    range("K1", cert.K1.value.sign() > 0 && cert.K1.value <= cert.K2.value, cert.K1.value);
    range("K2", cert.K2.value.sign() > 0, cert.K2.value);
    range("C", cert.C.value >= one, cert.C.value);
    range("alpha", cert.alpha.value.sign() > 0, cert.alpha.value);
    range("beta", cert.beta.value.sign() > 0, cert.beta.value);
    range("R_hat", cert.R_hat.value > one, cert.R_hat.value);
    if (cert.K1.provenance == Provenance::kRigorous && cert.eps.value.sign() > 0) {
        const bool ok = cert.K1.value == derive_K1(cert.eps.value);
        rep.add("K1 = eps/4", ok, ok ? "" : "K1 = " + cert.K1.value.to_decimal());
    }
    if (!rep.overall()) {
        return rep;
    }
    if (cert.U.empty() || cert.julia_approx.empty()) {
        rep.add("covers present", false, "U or julia_approx is empty");
        return rep;
    }
    UcondOptions uo;
    uo.julia_slack = cert.julia_hausdorff.value;
    rep.merge(validate_Ucond(map, cert.U, cert.julia_approx, cert.eps.value, cert.r.value, uo));

    // no critical point in U_2r(JA) minus JA
    {
        const detail::FastMap fm(map);
        const BoxCover& ja = cert.julia_approx;
        const BoxCover region = ja.inflate(cert.r.value.mul_2exp(1));
        const double half = ja.box_side().to_double() / 2;
        std::size_t bad = 0;
        std::string w;
        region.for_each_box([&](long ix, long iy) {
            if (ja.contains_box(ix, iy)) {
                return;
            }
            const ComplexDyadic c = region.box_center(ix, iy);
            if (!df_nonzero(fm, c.re.to_double(), c.im.to_double(), half, 6)) {
                if (bad < 5) {
                    w += " box(" + std::to_string(ix) + "," + std::to_string(iy) + ")";
                }
                ++bad;
            }
        });
        rep.add("no critical point in U_2r(J) \\ J", bad == 0,
                bad == 0 ? "" : std::to_string(bad) + " boxes may hold a zero of f':" + w);
    }
    {
        const Dyadic sup = sup_df_on_cover(map, cert.julia_approx, cert.r.value);
        const bool ok = cert.R_hat.value >= sup;
        rep.add("R_hat >= sup|Df| on U_r(J)", ok, "sup bound " + sup.to_decimal());
    }
    if (cert.alpha.provenance == Provenance::kRigorous || cert.beta.provenance == Provenance::kRigorous) {
        const AlphaBeta ab = derive_alpha_beta(cert.lambda.value, cert.r.value, cert.R_hat.value);
        const bool ok = cert.alpha.value >= ab.alpha && cert.beta.value <= ab.beta;
        rep.add("alpha, beta match derivation", ok,
                "derived alpha " + ab.alpha.to_decimal() + ", beta " + ab.beta.to_decimal());
    }
    if (rep.overall()) {
        rep.merge(falsify_distortion(cert, map));
    }
    return rep;
}

ValidationReport falsify_distortion(const Certificate& cert, const MapSpec& map, int samples, std::uint64_t seed)
{
    ValidationReport rep;
    std::vector<std::pair<long, long>> boxes;
    cert.U.for_each_box([&](long ix, long iy) {
        if (!cert.julia_approx.contains_box(ix, iy)) {
            boxes.emplace_back(ix, iy);
        }
    });
    if (boxes.empty()) {
        return rep;
    }
    const Decider dec(cert, map);
    const double side = cert.U.box_side().to_double();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    int refuted = 0;
    double worst = 0;
    std::string example;
    for (int k = 0; k < samples; ++k) {
        const auto [ix, iy] = boxes[rng() % boxes.size()];
        const double x = (static_cast<double>(ix) + u(rng)) * side;
        const double y = (static_cast<double>(iy) + u(rng)) * side;
        // J inside the approximation makes this a lower bound on d(z, J)
        const double lo = cert.julia_approx.dist_lower_fast(x, y);
        const DistanceBracket b = dec.probe(x, y, 24);
        if (b.hi > 0) {
            worst = std::max(worst, lo / b.hi);
        }
        if (lo > b.hi) {
            if (refuted++ == 0) {
                std::ostringstream os;
                os << " e.g. z = " << x << (y < 0 ? " - " : " + ") << std::fabs(y) << "i: d >= " << lo
                   << " but the certificate allows at most " << b.hi;
                example = os.str();
            }
        }
    }
    std::ostringstream os;
    os << refuted << " of " << samples << " sampled orbits exceed the upper distance bound (worst ratio "
       << std::setprecision(3) << worst << ")" << example;
    rep.add("K2, C, lambda not refuted by sampled orbits", refuted == 0, os.str());
    return rep;
}

} // namespace certjulia
