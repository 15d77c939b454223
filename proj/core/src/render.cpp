#include "certjulia/render.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cctype>
#include <complex>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "certjulia/error.hpp"
#include "fast_ball.hpp"

namespace certjulia {

namespace {

constexpr long kTile = 64;
constexpr long kLeafBlock = 4;

std::vector<std::string> split_commas(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(item);
    }
    return out;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& data)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path);
    }
    out << data;
}

double percentile(std::vector<double>& v, double q)
{
    if (v.empty()) {
        return 0;
    }
    const auto k = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1) + 0.5);
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
    return v[k];
}

std::vector<std::complex<double>> poly_coeffs(const MapSpec& map)
{
    if (!map.is_polynomial()) {
        throw std::invalid_argument("baseline renderers need a polynomial map");
    }
    return map.numerator_approx();
}

std::complex<double> horner(const std::vector<std::complex<double>>& c, std::complex<double> z,
                            std::complex<double>& dp)
{
    std::complex<double> p = 0;
    dp = 0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
        dp = dp * z + p;
        p = p * z + *it;
    }
    return p;
}

} // namespace

Region Region::parse(const std::string& text)
{
    const auto parts = split_commas(text);
    if (parts.size() != 4) {
        throw ParseError("region needs x0,y0,x1,y1: " + text);
    }
    // Corners need not be dyadic: the grid is snapped outward anyway.
    auto corner = [&](const std::string& s) {
        try {
            return Dyadic::parse(s);
        } catch (const ParseError&) {
            std::size_t used = 0;
            double v = 0;
            try {
                v = std::stod(s, &used);
            } catch (const std::exception&) {
                throw ParseError("bad region coordinate: " + s);
            }
            if (used != s.size() || !std::isfinite(v)) {
                throw ParseError("bad region coordinate: " + s);
            }
            return Dyadic::from_double(v);
        }
    };
    Region r{corner(parts[0]), corner(parts[1]), corner(parts[2]), corner(parts[3])};
    if (r.x1 < r.x0 || r.y1 < r.y0) {
        throw ParseError("empty region: " + text);
    }
    return r;
}

std::string Region::to_string() const
{
    return x0.to_decimal() + "," + y0.to_decimal() + "," + x1.to_decimal() + "," + y1.to_decimal();
}

PixelGrid PixelGrid::snap(const Region& region, int n)
{
    PixelGrid g;
    g.n = n;
    const long s = n + 2;
    const mpz_class i0 = region.x0.mul_2exp(s).floor();
    const mpz_class i1 = region.x1.mul_2exp(s).ceil();
    const mpz_class j0 = region.y0.mul_2exp(s).floor();
    const mpz_class j1 = region.y1.mul_2exp(s).ceil();
    if (!i0.fits_slong_p() || !i1.fits_slong_p() || !j0.fits_slong_p() || !j1.fits_slong_p()) {
        throw std::invalid_argument("region too large");
    }
    g.i0 = i0.get_si();
    g.j0 = j0.get_si();
    g.width = i1.get_si() - g.i0 + 1;
    g.height = j1.get_si() - g.j0 + 1;
    return g;
}

double PixelGrid::delta() const
{
    return std::ldexp(1.0, -n - 2);
}

double PixelGrid::x(long i) const
{
    return std::ldexp(static_cast<double>(i0 + i), -n - 2);
}

double PixelGrid::y(long j) const
{
    return std::ldexp(static_cast<double>(j0 + j), -n - 2);
}

ComplexDyadic PixelGrid::center(long i, long j) const
{
    return {Dyadic(i0 + i).mul_2exp(-n - 2), Dyadic(j0 + j).mul_2exp(-n - 2)};
}

Bitmap::Bitmap(long width, long height)
    : w_(width), h_(height), bits_(static_cast<std::size_t>(width * height), 0)
{
    if (width < 0 || height < 0) {
        throw std::invalid_argument("negative bitmap size");
    }
}

long Bitmap::count() const
{
    return static_cast<long>(std::count(bits_.begin(), bits_.end(), 1));
}

std::string Bitmap::to_pbm(const std::vector<std::string>& comments) const
{
    std::string out = "P4\n";
    for (const auto& c : comments) {
        out += "# " + c + "\n";
    }
    out += std::to_string(w_) + " " + std::to_string(h_) + "\n";
    const long row_bytes = (w_ + 7) / 8;
    for (long r = 0; r < h_; ++r) {
        const long j = h_ - 1 - r;
        for (long b = 0; b < row_bytes; ++b) {
            unsigned char byte = 0;
            for (long k = 0; k < 8; ++k) {
                const long i = b * 8 + k;
                if (i < w_ && get(i, j)) {
                    byte |= static_cast<unsigned char>(0x80u >> k);
                }
            }
            out.push_back(static_cast<char>(byte));
        }
    }
    return out;
}

void Bitmap::save_pbm(const std::string& path, const std::vector<std::string>& comments) const
{
    write_file(path, to_pbm(comments));
}

Bitmap Bitmap::from_pbm(const std::string& data)
{
    std::size_t pos = 0;
    auto token = [&]() {
        while (pos < data.size()) {
            if (data[pos] == '#') {
                while (pos < data.size() && data[pos] != '\n') {
                    ++pos;
                }
            } else if (std::isspace(static_cast<unsigned char>(data[pos])) != 0) {
                ++pos;
            } else {
                break;
            }
        }
        const std::size_t start = pos;
        while (pos < data.size() && std::isspace(static_cast<unsigned char>(data[pos])) == 0) {
            ++pos;
        }
        return data.substr(start, pos - start);
    };
    if (token() != "P4") {
        throw ParseError("not a P4 bitmap");
    }
    const long w = std::stol(token());
    const long h = std::stol(token());
    ++pos; // single whitespace before the raster
    const long row_bytes = (w + 7) / 8;
    if (data.size() < pos + static_cast<std::size_t>(row_bytes * h)) {
        throw ParseError("truncated bitmap");
    }
    Bitmap bm(w, h);
    for (long r = 0; r < h; ++r) {
        for (long i = 0; i < w; ++i) {
            const auto byte = static_cast<unsigned char>(data[pos + static_cast<std::size_t>(r * row_bytes + i / 8)]);
            bm.set(i, h - 1 - r, (byte & (0x80u >> (i % 8))) != 0);
        }
    }
    return bm;
}

Bitmap Bitmap::load_pbm(const std::string& path)
{
    return from_pbm(read_file(path));
}

RenderMode render_mode_from_string(const std::string& s)
{
    if (s == "certified") {
        return RenderMode::kCertified;
    }
    if (s == "escape" || s == "escape_time") {
        return RenderMode::kEscapeTime;
    }
    if (s == "dem") {
        return RenderMode::kDem;
    }
    throw ParseError("unknown render mode: " + s);
}

std::string to_string(RenderMode m)
{
    switch (m) {
    case RenderMode::kCertified:
        return "certified";
    case RenderMode::kEscapeTime:
        return "escape";
    case RenderMode::kDem:
        break;
    }
    return "dem";
}

std::string RenderStats::to_csv() const
{
    std::ostringstream out;
    out << std::setprecision(9);
    out << "key,value\n";
    out << "pixels," << pixels << "\n";
    out << "filled," << filled << "\n";
    out << "errors," << errors << "\n";
    out << "tiles_cleared," << tiles_cleared << "\n";
    out << "wall_seconds," << wall_seconds << "\n";
    out << "pixel_p50_us," << pixel_p50_us << "\n";
    out << "pixel_p95_us," << pixel_p95_us << "\n";
    out << "pixel_max_us," << pixel_max_us << "\n";
    out << "subprogram_calls," << decider.subprogram_calls << "\n";
    for (int r = 0; r < kReasonCount; ++r) {
        out << "reason_" << to_string(static_cast<Reason>(r)) << "," << decider.reasons[static_cast<std::size_t>(r)]
            << "\n";
    }
    out << "max_work_bits," << decider.max_work_bits << "\n";
    out << "fast_fallbacks," << decider.fast_fallbacks << "\n";
    out << "probes," << decider.probes << "\n";
    out << "ball_tests," << decider.ball_tests << "\n";
    out << "ball_cleared," << decider.ball_cleared << "\n";
    out << "cells," << decider.cells << "\n";
    out << "pixel_calls," << decider.pixels << "\n";
    for (const auto& [k, v] : decider.iterations) {
        out << "iterations_" << k << "," << v << "\n";
    }
    return out.str();
}

RenderResult render_certified(const Decider& decider, const Region& region, int n, int threads)
{
    if (n < decider.n0()) {
        throw std::invalid_argument("certified rendering needs n >= n0 = " + std::to_string(decider.n0()));
    }
    const auto start = std::chrono::steady_clock::now();
    RenderResult res;
    res.grid = PixelGrid::snap(region, n);
    const PixelGrid& g = res.grid;
    res.image = Bitmap(g.width, g.height);
    res.error_mask = Bitmap(g.width, g.height);
    res.certified = true;
    const double delta = g.delta();
    const int steps = decider.level(n + 2).L + 4;

    const long tx = (g.width + kTile - 1) / kTile;
    const long ty = (g.height + kTile - 1) / kTile;
    const long ntiles = tx * ty;
    std::atomic<long> next{0};
    threads = std::max(1, threads);

    struct Local {
        RenderStats stats;
        std::vector<double> times;
        std::exception_ptr error;
    };
    std::vector<Local> locals(static_cast<std::size_t>(threads));

    auto pixel = [&](Local& loc, long i, long j) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const int v = decider.pixel_value(n, g.center(i, j), &loc.stats.decider);
            res.image.set(i, j, v == 1);
        } catch (const Error&) {
            res.error_mask.set(i, j, true);
            ++loc.stats.errors;
        }
        const auto t1 = std::chrono::steady_clock::now();
        loc.times.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
    };

    // pixel disks of radius 2 delta around a block of centers
    auto block = [&](auto&& self, Local& loc, long ia, long ib, long ja, long jb) -> void {
        const double cx = 0.5 * (g.x(ia) + g.x(ib - 1));
        const double cy = 0.5 * (g.y(ja) + g.y(jb - 1));
        const double hw = 0.5 * static_cast<double>(ib - 1 - ia) * delta;
        const double hh = 0.5 * static_cast<double>(jb - 1 - ja) * delta;
        const double radius = detail::up(detail::abs_up(hw, hh) + 2 * delta);
        if (decider.ball_is_julia_free(cx, cy, radius, steps, &loc.stats.decider)) {
            ++loc.stats.tiles_cleared;
            return;
        }
        if (ib - ia <= kLeafBlock && jb - ja <= kLeafBlock) {
            for (long j = ja; j < jb; ++j) {
                for (long i = ia; i < ib; ++i) {
                    pixel(loc, i, j);
                }
            }
            return;
        }
        const long im = ib - ia > kLeafBlock ? (ia + ib) / 2 : ib;
        const long jm = jb - ja > kLeafBlock ? (ja + jb) / 2 : jb;
        self(self, loc, ia, im, ja, jm);
        if (im < ib) {
            self(self, loc, im, ib, ja, jm);
        }
        if (jm < jb) {
            self(self, loc, ia, im, jm, jb);
            if (im < ib) {
                self(self, loc, im, ib, jm, jb);
            }
        }
    };

    auto worker = [&](int w) {
        Local& loc = locals[static_cast<std::size_t>(w)];
        try {
            for (long t = next++; t < ntiles; t = next++) {
                const long ia = (t % tx) * kTile;
                const long ja = (t / tx) * kTile;
                block(block, loc, ia, std::min(ia + kTile, g.width), ja, std::min(ja + kTile, g.height));
            }
        } catch (...) {
            loc.error = std::current_exception();
        }
    };

    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int w = 0; w < threads; ++w) {
            pool.emplace_back(worker, w);
        }
        for (auto& th : pool) {
            th.join();
        }
    }

    std::vector<double> times;
    for (auto& loc : locals) {
        if (loc.error) {
            std::rethrow_exception(loc.error);
        }
        res.stats.decider.merge(loc.stats.decider);
        res.stats.errors += loc.stats.errors;
        res.stats.tiles_cleared += loc.stats.tiles_cleared;
        times.insert(times.end(), loc.times.begin(), loc.times.end());
    }
    res.stats.pixels = g.width * g.height;
    res.stats.filled = res.image.count();
    res.stats.pixel_p50_us = percentile(times, 0.5);
    res.stats.pixel_p95_us = percentile(times, 0.95);
    res.stats.pixel_max_us = times.empty() ? 0 : *std::max_element(times.begin(), times.end());
    res.stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

namespace {

// double iteration of a polynomial, for the baselines
struct PolyIter {
    std::vector<std::complex<double>> c;
    double R = 2;

    explicit PolyIter(const MapSpec& map) : c(poly_coeffs(map))
    {
        double s = 0;
        for (std::size_t k = 0; k + 1 < c.size(); ++k) {
            s += std::abs(c[k]);
        }
        R = std::max(2.0, 2 * (1 + s) / std::abs(c.back()));
    }

    int escape(double x, double y, int max_iter) const
    {
        std::complex<double> z(x, y);
        std::complex<double> dp;
        for (int k = 0; k < max_iter; ++k) {
            if (std::abs(z) > R) {
                return k;
            }
            z = horner(c, z, dp);
        }
        return std::abs(z) > R ? max_iter : -1;
    }

    DemEstimate dem(double x, double y, int max_iter) const
    {
        const double big = std::max(1e6, R * R);
        std::complex<double> z(x, y);
        std::complex<double> dz(1, 0);
        double max_dz = 1;
        for (int k = 0; k < max_iter; ++k) {
            std::complex<double> dp;
            const std::complex<double> fz = horner(c, z, dp);
            dz *= dp;
            z = fz;
            const double adz = std::abs(dz);
            if (!std::isfinite(adz)) {
                return {false, 0};
            }
            max_dz = std::max(max_dz, adz);
            const double az = std::abs(z);
            if (az > big) {
                return {true, az * std::log(az) / adz};
            }
        }
        return {false, 1 / max_dz};
    }
};

} // namespace

double escape_radius(const MapSpec& map)
{
    return PolyIter(map).R;
}

int escape_time(const MapSpec& map, double x, double y, int max_iter)
{
    return PolyIter(map).escape(x, y, max_iter);
}

Bitmap render_escape_time(const MapSpec& map, const Region& region, int n, int max_iter)
{
    const PolyIter it(map);
    const PixelGrid g = PixelGrid::snap(region, n);
    // bounded flags on the grid extended by two samples on each side
    const long W = g.width + 4;
    const long H = g.height + 4;
    std::vector<std::uint8_t> bounded(static_cast<std::size_t>(W * H));
    for (long j = 0; j < H; ++j) {
        for (long i = 0; i < W; ++i) {
            bounded[static_cast<std::size_t>(j * W + i)] = it.escape(g.x(i - 2), g.y(j - 2), max_iter) < 0;
        }
    }
    Bitmap bm(g.width, g.height);
    for (long j = 0; j < g.height; ++j) {
        for (long i = 0; i < g.width; ++i) {
            bool any_in = false;
            bool any_out = false;
            for (long b = 0; b < 5; ++b) {
                for (long a = 0; a < 5; ++a) {
                    const bool in = bounded[static_cast<std::size_t>((j + b) * W + i + a)] != 0;
                    any_in = any_in || in;
                    any_out = any_out || !in;
                }
            }
            bm.set(i, j, any_in && any_out);
        }
    }
    return bm;
}

DemEstimate dem_estimate(const MapSpec& map, double x, double y, int max_iter)
{
    return PolyIter(map).dem(x, y, max_iter);
}

Bitmap render_dem(const MapSpec& map, const Region& region, int n, int max_iter)
{
    const PolyIter it(map);
    const PixelGrid g = PixelGrid::snap(region, n);
    Bitmap bm(g.width, g.height);
    const double limit = 2 * g.delta();
    for (long j = 0; j < g.height; ++j) {
        for (long i = 0; i < g.width; ++i) {
            bm.set(i, j, it.dem(g.x(i), g.y(j), max_iter).estimate < limit);
        }
    }
    return bm;
}

RenderResult render(const RenderRequest& req)
{
    const MapSpec map = MapSpec::load(req.map_path);
    if (req.mode != RenderMode::kCertified) {
        RenderResult res;
        const auto start = std::chrono::steady_clock::now();
        res.grid = PixelGrid::snap(req.region, req.n);
        res.image = req.mode == RenderMode::kEscapeTime ? render_escape_time(map, req.region, req.n, req.max_iter)
                                                        : render_dem(map, req.region, req.n, req.max_iter);
        res.error_mask = Bitmap(res.grid.width, res.grid.height);
        res.stats.pixels = res.grid.width * res.grid.height;
        res.stats.filled = res.image.count();
        res.stats.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return res;
    }
    const Certificate cert = Certificate::load(req.cert_path);
    bool validated = false;
    if (!req.allow_unvalidated) {
        const ValidationReport rep = validate(cert, map);
        if (!rep.overall()) {
            throw CertificateInvalid(rep.to_text());
        }
        validated = true;
    }
    const Decider decider(cert, map);
    RenderResult res = render_certified(decider, req.region, req.n, req.threads);
    res.certified = validated;
    return res;
}

std::string ScalingTable::to_csv() const
{
    std::ostringstream out;
    out << std::setprecision(9);
    out << "n,L,points,median_us,p95_us,max_iterations,max_work_bits\n";
    for (const auto& r : rows) {
        out << r.n << "," << r.L << "," << r.points << "," << r.median_us << "," << r.p95_us << ","
            << r.max_iterations << "," << r.max_work_bits << "\n";
    }
    out << "# fitted_exponent," << exponent << "\n";
    return out.str();
}

double fit_exponent(const std::vector<double>& n, const std::vector<double>& t)
{
    if (n.size() != t.size() || n.size() < 2) {
        throw std::invalid_argument("fit_exponent needs two or more points");
    }
    double sx = 0;
    double sy = 0;
    double sxx = 0;
    double sxy = 0;
    const auto k = static_cast<double>(n.size());
    for (std::size_t i = 0; i < n.size(); ++i) {
        const double x = std::log(n[i]);
        const double y = std::log(t[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

ScalingTable benchmark_scaling(const Decider& decider, const std::vector<ComplexDyadic>& points,
                               const std::vector<int>& n_list)
{
    ScalingTable table;
    std::vector<double> ns;
    std::vector<double> ts;
    for (const int n : n_list) {
        ScalingRow row;
        row.n = n;
        row.L = decider.level(n).L;
        std::vector<double> times;
        times.reserve(points.size());
        DeciderStats st;
        for (const auto& z : points) {
            const auto t0 = std::chrono::steady_clock::now();
            const Verdict v = decider.decide(n, z, &st);
            const auto t1 = std::chrono::steady_clock::now();
            times.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
            row.max_iterations = std::max(row.max_iterations, v.iterations_used);
        }
        row.points = static_cast<long>(points.size());
        row.max_work_bits = st.max_work_bits;
        row.median_us = percentile(times, 0.5);
        row.p95_us = percentile(times, 0.95);
        table.rows.push_back(row);
        ns.push_back(n);
        ts.push_back(std::max(row.median_us, 1e-3));
    }
    if (ns.size() >= 2) {
        table.exponent = fit_exponent(ns, ts);
    }
    return table;
}

} // namespace certjulia
