#ifndef CERTJULIA_COVER_HPP
#define CERTJULIA_COVER_HPP

#include <functional>
#include <string>
#include <vector>

#include "certjulia/dyadic.hpp"

namespace certjulia {

class MapSpec;

struct ValidationReport {
    struct Check {
        std::string name;
        bool pass = true;
        std::string witness;
    };
    std::vector<Check> checks;
    std::vector<std::string> assumptions;

    void add(std::string name, bool pass, std::string witness = {});
    bool overall() const;
    const Check* find(const std::string& name) const;
    std::string to_text() const;
    void merge(const ValidationReport& other);
};

// Finite union of closed squares [ix, ix+1] x [iy, iy+1] * 2^-m.  Rows are
// stored densely as sorted, merged runs of box indices.
class BoxCover {
public:
    struct Run {
        long lo; // inclusive box indices
        long hi;
        friend bool operator==(const Run&, const Run&) = default;
    };

    BoxCover() = default;
    explicit BoxCover(int m) : m_(m) {}

    int resolution() const { return m_; }
    Dyadic box_side() const { return Dyadic::pow2(-m_); }
    // Upper bound on half the box diagonal.
    Dyadic half_diagonal() const;

    void add_box(long ix, long iy);
    void add_run(long iy, long lo, long hi);
    // adds the box whose lower-left corner is floor(z * 2^m)
    void add_point(double x, double y);
    void add_point(const ComplexDyadic& z);

    bool empty() const { return count_ == 0; }
    std::size_t box_count() const { return count_; }
    long row_min() const { return iy0_; }
    long row_max() const { return iy0_ + static_cast<long>(rows_.size()) - 1; }
    const std::vector<Run>& row(long iy) const;
    long col_min() const;
    long col_max() const;

    bool contains_box(long ix, long iy) const;
    // exact; boundaries count as inside
    bool contains(const ComplexDyadic& z) const;
    bool contains(double x, double y) const;

    // Lower bound on the Euclidean distance, within 2^(-m-8) of the truth.
    // Throws PointInsideCover when z is in the cover.
    Dyadic dist_lower(const ComplexDyadic& z) const;
    // Upper bound, 0 when inside.
    Dyadic dist_upper(const ComplexDyadic& z) const;
    // Double versions: rigorous lower / upper bounds, 0 when inside.  The lower
    // bound search stops at `cap`, returning min(dist, cap) from below.
    double dist_lower_fast(double x, double y, double cap = 1e300) const;
    double dist_upper_fast(double x, double y) const;

    // Over-approximation of the closed t-neighborhood (t rounded up to whole boxes).
    BoxCover inflate(const Dyadic& t) const;
    BoxCover inflate_boxes(long k) const;
    // Same set at a finer resolution, or an over-approximation at a coarser one.
    BoxCover at_resolution(int m) const;
    bool subset_of(const BoxCover& other) const;
    // Upper bound on the diameter (bounding-box diagonal).
    Dyadic diameter() const;

    ComplexDyadic box_center(long ix, long iy) const;
    void for_each_box(const std::function<void(long ix, long iy)>& fn) const;

    std::string serialize() const;
    static BoxCover parse(const std::string& text);
    void save(const std::string& path) const;
    static BoxCover load(const std::string& path);

    friend bool operator==(const BoxCover& a, const BoxCover& b);

private:
    std::vector<Run>& row_mut(long iy);
    void recount();
    // squared distance in box units from (X, Y) to the nearest box, searching
    // rows within sqrt(cap2); returns candidate runs within slack of the best
    double search(double X, double Y, double cap2, std::vector<std::pair<long, Run>>* near) const;

    int m_ = 0;
    long iy0_ = 0;
    std::vector<std::vector<Run>> rows_;
    std::size_t count_ = 0;
};

struct UcondOptions {
    // Hausdorff bound between the Julia approximation and J.
    Dyadic julia_slack;
    // requires images to land inside U_{r (1 - margin)}(J)
    Dyadic margin;
    int max_witnesses = 20;
};

// f(U_eps(U)) inside U_r(J) and U_{2 eps}(JA) inside U, both relative to the
// approximation JA.
ValidationReport validate_Ucond(const MapSpec& map, const BoxCover& U, const BoxCover& julia_approx,
                                const Dyadic& eps, const Dyadic& r, const UcondOptions& opt = {});

// Boxes hit by the backward tree of `seed`: complete down to `depth`, then
// continued through newly reached boxes until no new box appears, then
// extended by a fixed set of random backward orbits.  Deterministic.
BoxCover build_cover_inverse_iteration(const MapSpec& map, int depth, int m, const ComplexDyadic& seed);

} // namespace certjulia

#endif
