#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "certjulia/certificate.hpp"
#include "certjulia/cover.hpp"
#include "certjulia/decider.hpp"
#include "certjulia/error.hpp"
#include "certjulia/map.hpp"
#include "certjulia/oracles.hpp"
#include "certjulia/render.hpp"

namespace fs = std::filesystem;
using namespace certjulia;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitExhausted = 3;

std::vector<int> parse_int_list(const std::string& s)
{
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto dash = item.find("..");
        if (dash != std::string::npos) {
            const int a = std::stoi(item.substr(0, dash));
            const int b = std::stoi(item.substr(dash + 2));
            for (int k = a; k <= b; ++k) {
                out.push_back(k);
            }
        } else if (!item.empty()) {
            out.push_back(std::stoi(item));
        }
    }
    return out;
}

std::complex<double> parse_point(const std::string& s)
{
    const auto comma = s.find(',');
    if (comma == std::string::npos) {
        return {std::stod(s), 0.0};
    }
    return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
}

std::vector<ComplexDyadic> read_points(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path);
    }
    std::vector<ComplexDyadic> pts;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::istringstream ls(line);
        std::string x;
        std::string y;
        ls >> x >> y;
        pts.emplace_back(Dyadic::from_double(std::stod(x)), Dyadic::from_double(std::stod(y)));
    }
    return pts;
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path);
    }
    out << text;
}

// Closed-form distortion bound for z -> z^2 on the annulus holding U.
Dyadic circle_K2(const BoxCover& U, const Dyadic& eps)
{
    double rho = 0;
    const double side = U.box_side().to_double();
    U.for_each_box([&](long ix, long iy) {
        const double x0 = static_cast<double>(ix) * side;
        const double y0 = static_cast<double>(iy) * side;
        const double x1 = x0 + side;
        const double y1 = y0 + side;
        const double far = std::hypot(std::max(std::fabs(x0), std::fabs(x1)), std::max(std::fabs(y0), std::fabs(y1)));
        const double nx = x0 > 0 ? x0 : (x1 < 0 ? -x1 : 0.0);
        const double ny = y0 > 0 ? y0 : (y1 < 0 ? -y1 : 0.0);
        const double near = std::hypot(nx, ny);
        rho = std::max({rho, far - 1, 1 - near});
    });
    const double e = eps.to_double(Round::kUp);
    const double so = (1 + rho + e) * (1 + rho + e);
    const double si = (1 - rho - e) * (1 - rho - e);
    if (!(si > 0)) {
        throw InvalidConstants("U reaches the origin; no closed form");
    }
    const double k2 = std::max(so * std::log(so), std::log(1 / si) * std::sqrt(si)) * 1.25;
    return Dyadic::from_double(k2).round_sig(8, Round::kUp);
}

int cmd_render(const RenderRequest& req, const std::string& error_path)
{
    RenderResult res;
    try {
        res = render(req);
    } catch (const CertificateInvalid& e) {
        std::cerr << "certificate invalid:\n" << e.what() << "\n";
        return kExitInvalid;
    }
    std::vector<std::string> comments;
    const PixelGrid& g = res.grid;
    std::string label = req.mode == RenderMode::kCertified && res.certified ? "certified" : "UNCERTIFIED";
    comments.push_back("certjulia " + label + " mode=" + to_string(req.mode) + " n=" + std::to_string(req.n));
    comments.push_back("grid i0=" + std::to_string(g.i0) + " j0=" + std::to_string(g.j0) + " delta=2^-" +
                       std::to_string(req.n + 2));
    if (!req.image_path.empty()) {
        res.image.save_pbm(req.image_path, comments);
    }
    if (res.stats.errors > 0) {
        const std::string path = error_path.empty() ? req.image_path + ".errors.pbm" : error_path;
        res.error_mask.save_pbm(path, {"certjulia error mask: pixels that exhausted precision"});
    }
    if (!req.stats_path.empty()) {
        write_text(req.stats_path, res.stats.to_csv());
    }
    std::cout << label << " " << g.width << "x" << g.height << " filled=" << res.stats.filled
              << " errors=" << res.stats.errors << " seconds=" << res.stats.wall_seconds << "\n";
    return res.stats.errors > 0 ? kExitExhausted : kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Certified Julia set rendering"};
    app.require_subcommand(1);

    // render
    RenderRequest rq;
    std::string region_text;
    std::string mode_text = "certified";
    std::string error_path;
    auto* render_cmd = app.add_subcommand("render", "Render a region at precision n");
    render_cmd->add_option("--map", rq.map_path, "map file")->required();
    render_cmd->add_option("--cert", rq.cert_path, "certificate file");
    render_cmd->add_option("--region", region_text, "x0,y0,x1,y1")->required();
    render_cmd->add_option("--n", rq.n, "precision")->required();
    render_cmd->add_option("--mode", mode_text, "certified|escape|dem");
    render_cmd->add_option("--threads", rq.threads, "worker threads");
    render_cmd->add_option("--max-iter", rq.max_iter, "iterations for the baselines");
    render_cmd->add_option("--out", rq.image_path, "PBM output");
    render_cmd->add_option("--stats", rq.stats_path, "CSV statistics");
    render_cmd->add_option("--errors", error_path, "error mask output");
    render_cmd->add_flag("--allow-unvalidated", rq.allow_unvalidated, "skip certificate validation");

    // bench
    std::string map_path;
    std::string cert_path;
    std::string n_list_text = "8,12,16,20";
    std::string points_path;
    std::string out_path;
    long near_circle = 0;
    std::uint64_t seed = 1;
    auto* bench_cmd = app.add_subcommand("bench", "Time the subprogram across n");
    bench_cmd->add_option("--map", map_path)->required();
    bench_cmd->add_option("--cert", cert_path)->required();
    bench_cmd->add_option("--n-list", n_list_text, "comma list, a..b ranges allowed");
    bench_cmd->add_option("--points", points_path, "file of 'x y' lines");
    bench_cmd->add_option("--near-circle", near_circle, "generate this many points near |z| = 1");
    bench_cmd->add_option("--seed", seed);
    bench_cmd->add_option("--out", out_path, "CSV output");

    // validate
    auto* validate_cmd = app.add_subcommand("validate", "Check a certificate against its map");
    validate_cmd->add_option("--map", map_path)->required();
    validate_cmd->add_option("--cert", cert_path)->required();

    // conform
    std::string oracle_name;
    SampleSpec spec;
    auto* conform_cmd = app.add_subcommand("conform", "Check subprogram answers against an exact oracle");
    conform_cmd->add_option("--map", map_path)->required();
    conform_cmd->add_option("--cert", cert_path)->required();
    conform_cmd->add_option("--oracle", oracle_name, "circle|segment")->required();
    conform_cmd->add_option("--n-list", n_list_text);
    conform_cmd->add_option("--samples", spec.per_n, "samples per n");
    conform_cmd->add_option("--seed", spec.seed);
    conform_cmd->add_option("--threads", spec.threads);
    conform_cmd->add_flag("--fast", spec.fast, "double fast path with exact fallback");
    conform_cmd->add_option("--out", out_path, "CSV output");

    // build-cover
    std::string seed_text = "1,0";
    int depth = 16;
    int m = 8;
    long dilate = 1;
    auto* cover_cmd = app.add_subcommand("build-cover", "Box cover of J by inverse iteration");
    cover_cmd->add_option("--map", map_path)->required();
    cover_cmd->add_option("--seed", seed_text, "point of J, x,y");
    cover_cmd->add_option("--depth", depth);
    cover_cmd->add_option("--m", m, "resolution 2^-m");
    cover_cmd->add_option("--dilate", dilate, "extra boxes around each hit");
    cover_cmd->add_option("--out", out_path)->required();

    // cloud
    long count = 1000;
    auto* cloud_cmd = app.add_subcommand("cloud", "Random backward orbits");
    cloud_cmd->add_option("--map", map_path)->required();
    cloud_cmd->add_option("--seed", seed_text);
    cloud_cmd->add_option("--depth", depth);
    cloud_cmd->add_option("--count", count);
    cloud_cmd->add_option("--rng", seed);
    cloud_cmd->add_option("--out", out_path)->required();

    // make-certificate
    std::string name;
    std::string lambda_text;
    std::string r_text;
    std::string eps_text;
    std::string mu_text = "1/2";
    std::string K2_text;
    std::string C_text;
    std::string R_hat_text;
    std::string dist_oracle;
    bool K2_circle = false;
    int samples = 20000;
    auto* make_cmd = app.add_subcommand("make-certificate", "Assemble and validate a certificate");
    make_cmd->add_option("--map", map_path)->required();
    make_cmd->add_option("--out", out_path, "certificate path; covers are written next to it")->required();
    make_cmd->add_option("--name", name);
    make_cmd->add_option("--lambda", lambda_text)->required();
    make_cmd->add_option("--r", r_text)->required();
    make_cmd->add_option("--eps", eps_text)->required();
    make_cmd->add_option("--mu", mu_text);
    make_cmd->add_option("--seed", seed_text, "point of J for inverse iteration");
    std::vector<std::string> extra_points;
    make_cmd->add_option("--add-point", extra_points,
                         "x,y[,radius]: point of J, with the disk around it, added to the Julia cover")
        ->allow_extra_args(false);
    make_cmd->add_option("--depth", depth);
    make_cmd->add_option("--m", m, "cover resolution");
    make_cmd->add_option("--dilate", dilate);
    make_cmd->add_option("--K2", K2_text, "asserted K2");
    make_cmd->add_option("--C", C_text, "asserted C");
    make_cmd->add_flag("--K2-circle", K2_circle, "closed-form K2 for z^2");
    make_cmd->add_option("--R-hat", R_hat_text, "derivative bound; derived when omitted");
    make_cmd->add_option("--samples", samples, "sample budget for the K2, C fit");
    make_cmd->add_option("--distance", dist_oracle, "exact distance for the fit: circle|segment");

    CLI11_PARSE(app, argc, argv);

    try {
        if (render_cmd->parsed()) {
            rq.region = Region::parse(region_text);
            rq.mode = render_mode_from_string(mode_text);
            if (rq.mode == RenderMode::kCertified && rq.cert_path.empty()) {
                std::cerr << "--cert is required in certified mode\n";
                return kExitError;
            }
            return cmd_render(rq, error_path);
        }

        if (bench_cmd->parsed()) {
            const MapSpec map = MapSpec::load(map_path);
            const Certificate cert = Certificate::load(cert_path);
            std::vector<ComplexDyadic> pts;
            if (!points_path.empty()) {
                pts = read_points(points_path);
            }
            if (near_circle > 0) {
                std::mt19937_64 rng(seed);
                std::uniform_real_distribution<double> u(0.0, 1.0);
                for (long k = 0; k < near_circle; ++k) {
                    const double th = 2 * M_PI * u(rng);
                    const double rho = 1 + (u(rng) - 0.5) * std::ldexp(1.0, -6);
                    pts.emplace_back(Dyadic::from_double(rho * std::cos(th)), Dyadic::from_double(rho * std::sin(th)));
                }
            }
            if (pts.empty()) {
                std::cerr << "no points: pass --points or --near-circle\n";
                return kExitError;
            }
            const Decider decider(cert, map);
            const ScalingTable t = benchmark_scaling(decider, pts, parse_int_list(n_list_text));
            const std::string csv = t.to_csv();
            if (!out_path.empty()) {
                write_text(out_path, csv);
            }
            std::cout << csv;
            return kExitOk;
        }

        if (validate_cmd->parsed()) {
            const MapSpec map = MapSpec::load(map_path);
            const Certificate cert = Certificate::load(cert_path);
            const ValidationReport rep = validate(cert, map);
            std::cout << rep.to_text();
            return rep.overall() ? kExitOk : kExitInvalid;
        }

        if (conform_cmd->parsed()) {
            const MapSpec map = MapSpec::load(map_path);
            const Certificate cert = Certificate::load(cert_path);
            const Decider decider(cert, map);
            const ConformanceReport rep =
                conformance_check(decider, oracle_by_name(oracle_name), parse_int_list(n_list_text), spec);
            if (!out_path.empty()) {
                write_text(out_path, rep.to_csv());
            }
            std::cout << rep.to_csv() << rep.summary() << "\n";
            for (const auto& v : rep.violations) {
                std::cout << "violation n=" << v.n << " z=" << v.z.to_string() << " bit=" << v.bit
                          << " dist in [" << v.dist.lo.to_decimal() << ", " << v.dist.hi.to_decimal() << "]\n";
            }
            return rep.pass() ? kExitOk : kExitError;
        }

        if (cover_cmd->parsed()) {
            const MapSpec map = MapSpec::load(map_path);
            const auto s = parse_point(seed_text);
            BoxCover c = build_cover_inverse_iteration(map, depth, m, {Dyadic::from_double(s.real()),
                                                                       Dyadic::from_double(s.imag())});
            if (dilate > 0) {
                c = c.inflate_boxes(dilate);
            }
            c.save(out_path);
            std::cout << "boxes=" << c.box_count() << " m=" << m << "\n";
            return kExitOk;
        }

        if (cloud_cmd->parsed()) {
            const MapSpec map = MapSpec::load(map_path);
            const Cloud cl = inverse_iteration_cloud(map, depth, parse_point(seed_text), count, seed);
            std::ostringstream os;
            os.precision(17);
            os << "# depth " << cl.depth << "\n";
            for (const auto& p : cl.points) {
                os << p.real() << " " << p.imag() << "\n";
            }
            write_text(out_path, os.str());
            return kExitOk;
        }

        if (make_cmd->parsed()) {
            const MapSpec map = MapSpec::load(map_path);
            Certificate cert;
            cert.name = name.empty() ? fs::path(out_path).stem().string() : name;
            cert.map_file = fs::relative(fs::absolute(map_path), fs::absolute(out_path).parent_path()).string();
            auto exact = [](const std::string& text) {
                // accepts p/q with q a power of two
                const auto slash = text.find('/');
                if (slash == std::string::npos) {
                    return Dyadic::parse(text);
                }
                const Dyadic q = Dyadic::parse(text.substr(slash + 1));
                if (q.mantissa() != 1 || q.exponent() < 0) {
                    throw ParseError("denominator must be a power of two: " + text);
                }
                return Dyadic::parse(text.substr(0, slash)).mul_2exp(-q.exponent());
            };
            cert.lambda = {exact(lambda_text), Provenance::kUserAsserted, "ESC contraction rate"};
            cert.r = {exact(r_text), Provenance::kUserAsserted, "ESC radius"};
            cert.mu = {exact(mu_text), Provenance::kUserAsserted, "recurrence exponent"};
            cert.eps = {exact(eps_text), Provenance::kUserAsserted, "width of U around J"};
            cert.K1 = {derive_K1(cert.eps.value), Provenance::kRigorous, "eps/4"};

            const auto s = parse_point(seed_text);
            BoxCover ja = build_cover_inverse_iteration(map, depth, m,
                                                        {Dyadic::from_double(s.real()), Dyadic::from_double(s.imag())});
            // e.g. a critical point in J, which backward orbits reach only sparsely
            Dyadic slack = Dyadic(3 * (dilate + 1)).mul_2exp(-m - 1);
            for (const auto& text : extra_points) {
                const auto last = text.rfind(',');
                const bool has_radius = std::count(text.begin(), text.end(), ',') == 2;
                const auto p = parse_point(has_radius ? text.substr(0, last) : text);
                ja.add_point(p.real(), p.imag());
                if (has_radius) {
                    const Dyadic radius = exact(text.substr(last + 1));
                    BoxCover disk(m);
                    disk.add_point(p.real(), p.imag());
                    disk.inflate(radius).for_each_box([&](long ix, long iy) { ja.add_box(ix, iy); });
                    // the disk may hold boxes that miss J
                    slack = max(slack, radius + ja.box_side().mul_2exp(1));
                }
            }
            if (dilate > 0) {
                ja = ja.inflate_boxes(dilate);
            }
            cert.julia_approx = ja;
            cert.julia_hausdorff = {slack, Provenance::kHeuristic, "inverse iteration boxes, dilated"};
            cert.U = ja.inflate(cert.eps.value.mul_2exp(1));
            const std::string stem = fs::path(out_path).stem().string();
            cert.U_file = stem + ".U.cover";
            cert.julia_file = stem + ".julia.cover";

            if (R_hat_text.empty()) {
                const Dyadic sup = sup_df_on_cover(map, ja, cert.r.value);
                cert.R_hat = {sup.round_to(3, Round::kUp), Provenance::kRigorous, "sup |f'| on U_r(J), rounded up"};
            } else {
                cert.R_hat = {exact(R_hat_text), Provenance::kUserAsserted, "asserted"};
            }
            const AlphaBeta ab = derive_alpha_beta(cert.lambda.value, cert.r.value, cert.R_hat.value);
            cert.alpha = {ab.alpha, Provenance::kRigorous, "derived from lambda, r, R_hat"};
            cert.beta = {ab.beta, Provenance::kRigorous, "derived from lambda, r, R_hat"};

            if (K2_circle) {
                cert.K2 = {circle_K2(cert.U, cert.eps.value), Provenance::kUserAsserted,
                           "closed form for z^2 on the annulus holding U, margin 1.25"};
                cert.C = {Dyadic(1), Provenance::kUserAsserted, "no distortion growth for z^2"};
            } else if (!K2_text.empty()) {
                cert.K2 = {exact(K2_text), Provenance::kUserAsserted, "asserted"};
                cert.C = {C_text.empty() ? Dyadic(1) : exact(C_text), Provenance::kUserAsserted, "asserted"};
            } else {
                EstimateOptions eo;
                if (!dist_oracle.empty()) {
                    eo.distance = dist_oracle == "circle" ? dist_circle : dist_segment;
                }
                const K2CEstimate est = estimate_K2_C(map, cert, samples, eo);
                cert.K2 = {est.K2, est.provenance, est.note};
                cert.C = {est.C, est.provenance, est.note};
            }

            const ValidationReport rep = validate(cert, map);
            std::cout << rep.to_text();
            cert.save(out_path);
            std::cout << "wrote " << out_path << " n0=" << cert.n0() << " K2=" << cert.K2.value.to_decimal()
                      << " C=" << cert.C.value.to_decimal() << " U boxes=" << cert.U.box_count() << "\n";
            return rep.overall() ? kExitOk : kExitInvalid;
        }
    } catch (const PrecisionExhausted& e) {
        std::cerr << "precision exhausted: " << e.what() << "\n";
        return kExitExhausted;
    } catch (const CertificateInvalid& e) {
        std::cerr << "certificate invalid: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitOk;
}
