#ifndef CERTJULIA_DECIDER_HPP
#define CERTJULIA_DECIDER_HPP

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "certjulia/certificate.hpp"
#include "certjulia/dyadic.hpp"
#include "certjulia/map.hpp"

namespace certjulia {

namespace detail {
class FastMap;
}

enum class Reason { kExitStep3 = 0, kExitStep4, kExitStep6, kOutsideU, kCoarseCover };
inline constexpr int kReasonCount = 5;
std::string to_string(Reason r);

// Subprogram output.  bit 0: d(z, J) <= 2^-n-1.  bit 1: d(z, J) >= K(n) 2^-n-1.
// This is the reverse of the pixel convention, where 1 means fill.
struct Verdict {
    int bit = 0;
    Reason reason = Reason::kExitStep6;
    int iterations_used = 0;
    long max_work_bits = 0;
};

// Rigorous enclosure of d(w, J); hi may be infinite.
struct DistanceBracket {
    double lo = 0;
    double hi = 0;
};

struct DeciderStats {
    std::uint64_t subprogram_calls = 0;
    std::array<std::uint64_t, kReasonCount> reasons{};
    std::map<int, std::uint64_t> iterations; // histogram of iterations_used
    long max_work_bits = 0;
    std::uint64_t fast_fallbacks = 0;
    std::uint64_t probes = 0;
    std::uint64_t ball_tests = 0;
    std::uint64_t ball_cleared = 0;
    std::uint64_t cells = 0;
    std::uint64_t pixels = 0;

    void record(const Verdict& v);
    void merge(const DeciderStats& o);
};

// Decision procedures bound to one certificate and map; both must outlive it.
// All queries are const and thread-safe.
class Decider {
public:
    struct Level {
        int n = 0;
        int L = 0;
        Dyadic target;               // min(2^-n-1, eps)
        std::vector<Dyadic> thresh;  // thresh[i], i = 1..L
        std::vector<double> thresh_lo;
        std::vector<double> thresh_hi;
        Dyadic gap;                  // gap_K(n)
        double gap_lo = 0;
    };

    Decider(const Certificate& cert, const MapSpec& map);
    ~Decider();
    Decider(const Decider&) = delete;
    Decider& operator=(const Decider&) = delete;

    const Certificate& certificate() const { return *cert_; }
    const MapSpec& map() const { return *map_; }
    int n0() const { return n0_; }
    const Level& level(int n) const;

    // The subprogram on exact dyadic balls; requires z in U.
    Verdict subprogram(int n, const ComplexDyadic& z, DeciderStats* stats = nullptr) const;
    // z outside U: d(z, J) >= 2 eps, answer 1.
    Verdict decide_far_outside_U(int n, const ComplexDyadic& z, DeciderStats* stats = nullptr) const;
    // routes by membership in U
    Verdict decide(int n, const ComplexDyadic& z, DeciderStats* stats = nullptr) const;
    // Same contract, evaluated on double balls when their radii allow, falling
    // back to decide() otherwise.
    Verdict decide_fast(int n, double x, double y, DeciderStats* stats = nullptr) const;

    // Enclosure of d(w, J) from one orbit at level m.
    DistanceBracket probe(double x, double y, int m, DeciderStats* stats = nullptr) const;
    // true only if the disk D((x, y), radius) provably misses J
    bool ball_is_julia_free(double x, double y, double radius, int max_steps, DeciderStats* stats = nullptr) const;

    // Pixel function: 1 (fill) when d(z, J) <= 2^-n-2, 0 when d(z, J) >= 2^-n-1.
    // z must be a double-representable point.
    int pixel_value(int n, const ComplexDyadic& z, DeciderStats* stats = nullptr) const;
    // The literal sample-grid rule; much slower, for cross-checks.
    int pixel_value_grid(int n, const ComplexDyadic& z, DeciderStats* stats = nullptr) const;
    // Low-resolution rule from the Julia approximation; sound for n <= n0 - 4.
    int coarse_pixel_value(int n, const ComplexDyadic& z) const;

private:
    int dfs(int n, double zx, double zy, double cx, double cy, double a, int depth, int leaf_depth,
            DeciderStats* stats) const;

    const Certificate* cert_;
    const MapSpec* map_;
    std::unique_ptr<detail::FastMap> fast_;
    int n0_;
    double eps_;
    double K1_lo_;
    double K2_hi_;
    std::vector<double> cs_hi_;      // C^sqrt(i) upper bounds
    std::vector<double> lambda_pow_; // lambda^j upper bounds
    mutable std::mutex mu_;
    mutable std::map<int, std::unique_ptr<Level>> levels_;
};

Verdict subprogram(const Certificate& cert, const MapSpec& map, int n, const ComplexDyadic& z);
Verdict decide_far_outside_U(const Certificate& cert, const MapSpec& map, int n, const ComplexDyadic& z);
int pixel_value(const Certificate& cert, const MapSpec& map, int n, const ComplexDyadic& z);
int coarse_pixel_value(const Certificate& cert, const MapSpec& map, int n, const ComplexDyadic& z);

} // namespace certjulia

#endif
