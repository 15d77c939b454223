#ifndef CERTJULIA_RENDER_HPP
#define CERTJULIA_RENDER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "certjulia/certificate.hpp"
#include "certjulia/decider.hpp"
#include "certjulia/dyadic.hpp"
#include "certjulia/map.hpp"

namespace certjulia {

// Rectangle [x0, x1] x [y0, y1].
struct Region {
    Dyadic x0;
    Dyadic y0;
    Dyadic x1;
    Dyadic y1;

    // "x0,y0,x1,y1"
    static Region parse(const std::string& text);
    std::string to_string() const;
};

// Pixel (i, j) sits at ((i0 + i) delta, (j0 + j) delta), delta = 2^-n-2,
// with j growing upward.
struct PixelGrid {
    int n = 0;
    long i0 = 0;
    long j0 = 0;
    long width = 0;
    long height = 0;

    // all grid points inside the region, after snapping it outward
    static PixelGrid snap(const Region& region, int n);
    double delta() const;
    double x(long i) const;
    double y(long j) const;
    ComplexDyadic center(long i, long j) const;
};

class Bitmap {
public:
    Bitmap() = default;
    Bitmap(long width, long height);

    long width() const { return w_; }
    long height() const { return h_; }
    bool get(long i, long j) const { return bits_[static_cast<std::size_t>(j * w_ + i)] != 0; }
    void set(long i, long j, bool v) { bits_[static_cast<std::size_t>(j * w_ + i)] = v ? 1 : 0; }
    long count() const;

    // P4, top row is j = height - 1
    std::string to_pbm(const std::vector<std::string>& comments = {}) const;
    void save_pbm(const std::string& path, const std::vector<std::string>& comments = {}) const;
    static Bitmap from_pbm(const std::string& data);
    static Bitmap load_pbm(const std::string& path);

    bool operator==(const Bitmap& o) const = default;

private:
    long w_ = 0;
    long h_ = 0;
    std::vector<std::uint8_t> bits_;
};

enum class RenderMode { kCertified, kEscapeTime, kDem };

RenderMode render_mode_from_string(const std::string& s);
std::string to_string(RenderMode m);

struct RenderRequest {
    std::string map_path;
    std::string cert_path;
    Region region;
    int n = 8;
    RenderMode mode = RenderMode::kCertified;
    int threads = 1;
    int max_iter = 256;
    std::string image_path;
    std::string stats_path;
    bool allow_unvalidated = false;
};

struct RenderStats {
    DeciderStats decider;
    long pixels = 0;
    long filled = 0;
    long errors = 0;
    long tiles_cleared = 0;
    double wall_seconds = 0;
    // per pixel_value call, in microseconds
    double pixel_p50_us = 0;
    double pixel_p95_us = 0;
    double pixel_max_us = 0;

    std::string to_csv() const;
};

struct RenderResult {
    PixelGrid grid;
    Bitmap image;
    Bitmap error_mask;
    RenderStats stats;
    bool certified = false;
};

// Certified rendering.  Deterministic for any thread count.
RenderResult render_certified(const Decider& decider, const Region& region, int n, int threads = 1);

// Escape iteration, or -1 if the orbit stays bounded for max_iter steps.
int escape_time(const MapSpec& map, double x, double y, int max_iter);
double escape_radius(const MapSpec& map);
// Uncertified baselines.  Escape time fills pixels whose 5x5 neighborhood of
// spacing delta mixes bounded and escaping points.
Bitmap render_escape_time(const MapSpec& map, const Region& region, int n, int max_iter);

struct DemEstimate {
    bool escaped = false;
    double estimate = 0;
};
// |z_k| log|z_k| / |z_k'| for escaping orbits, 1 / max|z_k'| for bounded ones
DemEstimate dem_estimate(const MapSpec& map, double x, double y, int max_iter);
// fills pixels with estimate < 2 delta
Bitmap render_dem(const MapSpec& map, const Region& region, int n, int max_iter);

// Loads, validates (unless allowed otherwise) and renders.  Throws
// CertificateInvalid; the result marks pixels that exhausted precision.
RenderResult render(const RenderRequest& req);

struct ScalingRow {
    int n = 0;
    int L = 0;
    long points = 0;
    double median_us = 0;
    double p95_us = 0;
    int max_iterations = 0;
    long max_work_bits = 0;
};

struct ScalingTable {
    std::vector<ScalingRow> rows;
    // least-squares slope of log(median time) against log(n)
    double exponent = 0;

    std::string to_csv() const;
};

// Times the exact subprogram only (one call per point and n).
ScalingTable benchmark_scaling(const Decider& decider, const std::vector<ComplexDyadic>& points,
                               const std::vector<int>& n_list);
double fit_exponent(const std::vector<double>& n, const std::vector<double>& t);

} // namespace certjulia

#endif
