#ifndef CERTJULIA_CERTIFICATE_HPP
#define CERTJULIA_CERTIFICATE_HPP

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "certjulia/cover.hpp"
#include "certjulia/dyadic.hpp"

namespace certjulia {

class MapSpec;

enum class Provenance { kRigorous, kHeuristic, kUserAsserted };

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

struct Constant {
    Dyadic value;
    Provenance provenance = Provenance::kUserAsserted;
    std::string note;
};

// Non-uniform data for one map: ESC rate and radius, recurrence bound, the
// neighborhood U and its width eps, distortion constants K1, K2, C, the
// constants alpha, beta and the derivative bound R_hat.
struct Certificate {
    std::string name;
    std::string map_file;
    Constant lambda;
    Constant r;
    Constant mu;
    Constant eps;
    Constant K1;
    Constant K2;
    Constant C;
    Constant alpha;
    Constant beta;
    Constant R_hat;
    std::optional<Constant> ce_C;
    std::optional<Constant> ce_gamma;
    // Hausdorff bound between julia_approx and J
    Constant julia_hausdorff;

    BoxCover U;
    BoxCover julia_approx;
    // when non-empty the covers are stored next to the certificate
    std::string U_file;
    std::string julia_file;

    // ceil(log2(1/eps))
    int n0() const;

    static Certificate from_json(const std::string& text, const std::string& base_dir = ".");
    static Certificate load(const std::string& path);
    // Covers are written inline unless U_file / julia_file are set, in which
    // case they are written next to `path`.
    std::string to_json(bool inline_covers) const;
    void save(const std::string& path) const;
};

// smallest L with lambda^(L-1) <= 2^-(n+1), plus one
int L_of(const Dyadic& lambda, int n);
int L_of(const Certificate& cert, int n);

// upper bound on C^sqrt(i), nondecreasing in i
Dyadic C_pow_sqrt_up(const Dyadic& C, int i);
// upper bound on K2 C^sqrt(i) 2^(n+1) + 1
Dyadic threshold(const Dyadic& K2, const Dyadic& C, int i, int n);
Dyadic threshold(const Certificate& cert, int i, int n);
// lower bound on K1 / (K2 C^sqrt(L(n)) + 1)
Dyadic gap_K(const Certificate& cert, int n);

struct AlphaBeta {
    Dyadic alpha;
    Dyadic beta;
};
AlphaBeta derive_alpha_beta(const Dyadic& lambda, const Dyadic& r, const Dyadic& R_hat);
Dyadic derive_K1(const Dyadic& eps);

struct K2CEstimate {
    Dyadic K2;
    Dyadic C;
    Provenance provenance = Provenance::kHeuristic;
    int samples = 0;
    int exits = 0;
    double min_product = 0;
    double max_product = 0;
    std::string note;
};

struct EstimateOptions {
    // points on or near J; box centers of julia_approx when empty
    std::vector<std::complex<double>> cloud;
    // distance to J if known; otherwise the offset from the cloud point is used
    std::function<double(double, double)> distance;
    int j_min = 4;
    int j_max = 22;
    int n_ref = 16;
    std::uint64_t seed = 1;
    double safety = 2.0;
};

// Heuristic fit of K2, C from samples near the Julia approximation.
// Needs lambda, r, eps, U and julia_approx in `partial`.
K2CEstimate estimate_K2_C(const MapSpec& map, const Certificate& partial, int sample_budget,
                          const EstimateOptions& opt = {});

// Structural checks, then falsify_distortion.
ValidationReport validate(const Certificate& cert, const MapSpec& map);

// Samples points of U outside julia_approx and fails if one is provably farther
// from J than the certificate's exit bounds allow.  Can only refute, never prove.
ValidationReport falsify_distortion(const Certificate& cert, const MapSpec& map, int samples = 20000,
                                    std::uint64_t seed = 1);

} // namespace certjulia

#endif
