#include "certjulia/oracles.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <thread>

#include "certjulia/certificate.hpp"
#include "certjulia/error.hpp"

namespace certjulia {

namespace {

constexpr std::size_t kMaxWitnesses = 20;

OracleBracket abs_minus(const Dyadic& n2, const Dyadic& c, long bits)
{
    // brackets |sqrt(n2) - c|
    const Dyadic lo = Dyadic::sqrt(n2, bits + 1, Round::kDown);
    const Dyadic hi = Dyadic::sqrt(n2, bits + 1, Round::kUp);
    if (lo >= c) {
        return {lo - c, hi - c};
    }
    if (hi <= c) {
        return {c - hi, c - lo};
    }
    return {Dyadic(), max(hi - c, c - lo)};
}

Stratum classify(const OracleBracket& d, const Dyadic& near, const Dyadic& far)
{
    if (d.hi < near) {
        return Stratum::kOnSet;
    }
    if (d.lo > far) {
        return Stratum::kFar;
    }
    return Stratum::kBand;
}

} // namespace

OracleBracket exact_dist_circle(const ComplexDyadic& z, long bits)
{
    return abs_minus(z.norm2(), Dyadic(1), bits);
}

OracleBracket exact_dist_segment(const ComplexDyadic& z, long bits)
{
    const Dyadic ax = z.re.abs();
    if (ax <= Dyadic(2)) {
        const Dyadic ay = z.im.abs();
        return {ay, ay};
    }
    const Dyadic dx = ax - Dyadic(2);
    return abs_minus(dx * dx + z.im * z.im, Dyadic(), bits);
}

double dist_circle(double x, double y)
{
    return std::fabs(std::hypot(x, y) - 1.0);
}

double dist_segment(double x, double y)
{
    const double ax = std::fabs(x);
    if (ax <= 2.0) {
        return std::fabs(y);
    }
    return std::hypot(ax - 2.0, y);
}

DistanceOracle circle_oracle()
{
    DistanceOracle o;
    o.map_id = "circle";
    o.exact_dist = [](const ComplexDyadic& z, long bits) { return exact_dist_circle(z, bits); };
    o.sample_at = [](std::mt19937_64& rng, double d) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const double theta = 2 * std::numbers::pi * u(rng);
        const bool inside = u(rng) < 0.5 && d < 1.0;
        const double rho = inside ? 1.0 - d : 1.0 + d;
        return std::complex<double>(rho * std::cos(theta), rho * std::sin(theta));
    };
    return o;
}

DistanceOracle segment_oracle()
{
    DistanceOracle o;
    o.map_id = "segment";
    o.exact_dist = [](const ComplexDyadic& z, long bits) { return exact_dist_segment(z, bits); };
    o.sample_at = [](std::mt19937_64& rng, double d) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        if (u(rng) < 0.9) {
            const double x = -2.0 + 4.0 * u(rng);
            return std::complex<double>(x, u(rng) < 0.5 ? d : -d);
        }
        // near an endpoint, on the outer half circle
        const double theta = std::numbers::pi * (u(rng) - 0.5);
        const double sx = u(rng) < 0.5 ? 1.0 : -1.0;
        return std::complex<double>(sx * (2.0 + d * std::cos(theta)), d * std::sin(theta));
    };
    return o;
}

DistanceOracle oracle_by_name(const std::string& name)
{
    if (name == "circle") {
        return circle_oracle();
    }
    if (name == "segment") {
        return segment_oracle();
    }
    throw std::invalid_argument("no exact oracle named " + name);
}

std::string to_string(Stratum s)
{
    switch (s) {
    case Stratum::kOnSet:
        return "on-set";
    case Stratum::kBand:
        return "band";
    case Stratum::kFar:
        break;
    }
    return "far";
}

std::string ConformanceReport::to_csv() const
{
    std::ostringstream out;
    out << "n,stratum,samples,violations,answered0,answered1,errors,band_occupancy\n";
    for (const auto& r : rows) {
        const double occ = r.samples == 0 ? 0.0 : static_cast<double>(r.answered0) / static_cast<double>(r.samples);
        out << r.n << "," << to_string(r.stratum) << "," << r.samples << "," << r.violations << "," << r.answered0
            << "," << r.answered1 << "," << r.errors << ",";
        if (r.stratum == Stratum::kBand) {
            out << std::setprecision(6) << occ;
        }
        out << "\n";
    }
    return out.str();
}

std::string ConformanceReport::summary() const
{
    std::ostringstream out;
    out << (pass() ? "PASS" : "FAIL") << " samples=" << total_samples << " violations=" << total_violations
        << " errors=" << total_errors << " seconds=" << std::setprecision(4) << seconds;
    return out.str();
}

ConformanceReport conformance_check(const Decider& decider, const DistanceOracle& oracle,
                                    const std::vector<int>& n_list, const SampleSpec& spec)
{
    const auto start = std::chrono::steady_clock::now();
    ConformanceReport rep;
    for (const int n : n_list) {
        const Dyadic far = Dyadic::pow2(-n - 1);
        const Dyadic near = decider.level(n).gap.mul_2exp(-n - 1);

        std::vector<ComplexDyadic> pts = spec.points;
        if (pts.empty() && oracle.sample_at) {
            std::mt19937_64 rng(spec.seed * 1000003ULL + static_cast<std::uint64_t>(n));
            std::uniform_real_distribution<double> u(0.0, 1.0);
            const double t = std::ldexp(1.0, -n - 1);
            const double g = near.to_double(Round::kDown);
            pts.reserve(static_cast<std::size_t>(spec.per_n));
            for (long k = 0; k < spec.per_n; ++k) {
                const double pick = u(rng);
                double d;
                if (pick < spec.on_set) {
                    d = u(rng) < 0.1 ? 0.0 : 0.999 * g * u(rng);
                } else if (pick < spec.on_set + spec.band) {
                    d = g + (t - g) * u(rng);
                } else {
                    d = t * std::exp(u(rng) * std::log(3.0 / t));
                }
                const auto w = oracle.sample_at(rng, d);
                pts.emplace_back(Dyadic::from_double(w.real()), Dyadic::from_double(w.imag()));
            }
        }

        struct Outcome {
            Stratum stratum = Stratum::kOnSet;
            OracleBracket dist;
            int bit = -1;
            int iterations = 0;
        };
        std::vector<Outcome> out(pts.size());
        std::atomic<std::size_t> next{0};
        auto work = [&]() {
            for (std::size_t k = next++; k < pts.size(); k = next++) {
                Outcome& o = out[k];
                o.dist = oracle.exact_dist(pts[k], 64 + n);
                o.stratum = classify(o.dist, near, far);
                try {
                    const Verdict v = spec.fast ? decider.decide_fast(n, pts[k].re.to_double(), pts[k].im.to_double())
                                                : decider.decide(n, pts[k]);
                    o.bit = v.bit;
                    o.iterations = v.iterations_used;
                } catch (const Error&) {
                    o.bit = -1;
                }
            }
        };
        const int threads = std::max(1, spec.threads);
        if (threads == 1) {
            work();
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < threads; ++w) {
                pool.emplace_back(work);
            }
            for (auto& th : pool) {
                th.join();
            }
        }

        ConformanceRow rows[kStratumCount];
        for (int s = 0; s < kStratumCount; ++s) {
            rows[s].n = n;
            rows[s].stratum = static_cast<Stratum>(s);
        }
        for (std::size_t k = 0; k < pts.size(); ++k) {
            const Outcome& o = out[k];
            ConformanceRow& row = rows[static_cast<int>(o.stratum)];
            ++row.samples;
            if (o.bit < 0) {
                ++row.errors;
                continue;
            }
            (o.bit == 0 ? row.answered0 : row.answered1)++;
            const bool bad = (o.bit == 1 && o.dist.hi < near) || (o.bit == 0 && o.dist.lo > far);
            if (bad) {
                ++row.violations;
                if (rep.violations.size() < kMaxWitnesses) {
                    rep.violations.push_back({n, pts[k], o.bit, o.dist, o.iterations});
                }
            }
        }
        for (const auto& row : rows) {
            rep.total_samples += row.samples;
            rep.total_violations += row.violations;
            rep.total_errors += row.errors;
            rep.rows.push_back(row);
        }
    }
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

Cloud inverse_iteration_cloud(const MapSpec& map, int depth, std::complex<double> seed, long count,
                              std::uint64_t rng_seed)
{
    Cloud c;
    c.depth = depth;
    if (depth <= 0 || count <= 0) {
        c.points.push_back(seed);
        return c;
    }
    std::mt19937_64 rng(rng_seed);
    c.points.reserve(static_cast<std::size_t>(count));
    for (long k = 0; k < count; ++k) {
        std::complex<double> z = seed;
        for (int i = 0; i < depth; ++i) {
            const auto pre = preimages(map, z);
            if (pre.empty()) {
                throw RootFindingFailure("no preimages");
            }
            z = pre[static_cast<std::size_t>(rng() % pre.size())];
        }
        c.points.push_back(z);
    }
    return c;
}

} // namespace certjulia
