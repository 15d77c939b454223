#ifndef CERTJULIA_ORACLES_HPP
#define CERTJULIA_ORACLES_HPP

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "certjulia/decider.hpp"
#include "certjulia/dyadic.hpp"
#include "certjulia/map.hpp"

namespace certjulia {

// lo <= distance <= hi
struct OracleBracket {
    Dyadic lo;
    Dyadic hi;
};

// J(z^2) is the unit circle: brackets ||z| - 1| with width <= 2^-bits.
OracleBracket exact_dist_circle(const ComplexDyadic& z, long bits = 64);
// J(z^2 - 2) is [-2, 2]: brackets the distance to that segment.
OracleBracket exact_dist_segment(const ComplexDyadic& z, long bits = 64);

// double approximations, accurate to a few ulps
double dist_circle(double x, double y);
double dist_segment(double x, double y);

struct DistanceOracle {
    std::string map_id;
    std::function<OracleBracket(const ComplexDyadic&, long)> exact_dist;
    // a point at distance about d from J, or unset when the geometry is unknown
    std::function<std::complex<double>(std::mt19937_64&, double)> sample_at;
};

DistanceOracle circle_oracle();
DistanceOracle segment_oracle();
// "circle" or "segment"
DistanceOracle oracle_by_name(const std::string& name);

enum class Stratum { kOnSet = 0, kBand, kFar };
inline constexpr int kStratumCount = 3;
std::string to_string(Stratum s);

struct SampleSpec {
    long per_n = 10000;
    std::uint64_t seed = 1;
    // shares of the on-set and band strata; the rest is far
    double on_set = 0.4;
    double band = 0.3;
    // explicit points replace stratified sampling when non-empty
    std::vector<ComplexDyadic> points;
    // exact subprogram, or the double fast path with exact fallback
    bool fast = false;
    int threads = 1;
};

struct ConformanceRow {
    int n = 0;
    Stratum stratum = Stratum::kOnSet;
    long samples = 0;
    long violations = 0;
    long answered0 = 0;
    long answered1 = 0;
    long errors = 0;
};

struct Violation {
    int n = 0;
    ComplexDyadic z;
    int bit = 0;
    OracleBracket dist;
    int iterations = 0;
};

struct ConformanceReport {
    std::vector<ConformanceRow> rows;
    std::vector<Violation> violations; // first few
    long total_samples = 0;
    long total_violations = 0;
    long total_errors = 0;
    double seconds = 0;

    bool pass() const { return total_violations == 0 && total_errors == 0; }
    std::string to_csv() const;
    // one line, "PASS ..." or "FAIL ..."
    std::string summary() const;
};

// Checks the subprogram contract against an exact distance: answer 1 needs
// d >= gap_K(n) 2^-n-1, answer 0 needs d <= 2^-n-1.  Points in between are
// recorded, never flagged.
ConformanceReport conformance_check(const Decider& decider, const DistanceOracle& oracle,
                                    const std::vector<int>& n_list, const SampleSpec& spec);

struct Cloud {
    std::vector<std::complex<double>> points;
    int depth = 0;
};

// Random backward orbits of length `depth` from `seed`.  Throws RootFindingFailure.
Cloud inverse_iteration_cloud(const MapSpec& map, int depth, std::complex<double> seed, long count,
                              std::uint64_t rng_seed = 1);

} // namespace certjulia

#endif
