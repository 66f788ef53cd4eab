#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qr/coding.hpp"
#include "qr/geometry.hpp"

namespace qr {

// Parameter pack for one instance of the map. K is the dilatation bound,
// delta the half-gap of the two excluded disks around +-1. All derived
// scales live in the embedded table.
struct MapParams {
    double K = 0.0;
    double delta = 0.0;
    double lambda = 0.0;  // 2e/delta
    double alpha = 0.0;   // delta/4
    double t0 = 0.0;      // 4e
    double s0 = 4.0;
    int depth_cutoff = 24;
    ScaleTable scales;
};

// delta omitted -> 0.9 * min(1/14, (K-1)/(8K-6)). The second cap keeps the
// dilatation of the interpolating annulus below K; the error message carries
// the computed ceiling so callers can see how far off they were.
MapParams make_map_params(double K,
                          std::optional<double> delta = std::nullopt,
                          int depth_cutoff = 24);

// A point of the plane, optionally expressed relative to the center of a
// level-n disk: z = center(anchor) + offset * t_n, with |offset| <= 1 while
// anchored. The empty anchor means offset IS the absolute coordinate. Deep
// anchors reach points whose absolute coordinates have no double
// representation distinct from the center itself.
struct Point {
    Word anchor;
    Complex offset{0.0, 0.0};
};

inline Point absolute_point(const Complex& z) { return Point{Word{}, z}; }
Point anchored_point(Word anchor, const Complex& offset_in_tn_units);

// Best-effort absolute coordinate (exact for shallow anchors; deep offsets
// are absorbed into the center).
Complex to_complex(const Point& p, const ScaleTable& st);

// log of the euclidean distance between two points, exact in the anchored
// representation (never underflows for distinct addresses). -inf for equal
// points.
double log_point_distance(const Point& a, const Point& b, const ScaleTable& st);

enum class RegionTag : std::uint8_t {
    ZQuad,          // outside both 2delta-disks: the pure quadratic piece
    ZAnnulusPlus,   // delta <= |z-1| <= 2delta
    ZAnnulusMinus,  // delta <= |z+1| <= 2delta
    X,              // level-n disk minus its two children and the Y collar
    Y,              // collar s_n <= |z - a_u| <= t_n (n >= 1)
    CantorApprox,   // descent stopped at the configured cutoff depth
};

std::string region_tag_name(RegionTag tag);

struct Region {
    RegionTag tag = RegionTag::ZQuad;
    Word word;  // address for X/Y/CantorApprox; empty for the Z pieces
};

// Region of the point using the instance's depth cutoff; descent into the
// nest stops there and reports CantorApprox with the length-cutoff prefix.
Region classify(const Point& z, const MapParams& p);

// One application of the map. Ignores the depth cutoff: the true region is
// resolved as far as the scale table reaches. Output is anchored whenever
// the image lies inside a level-(n-1) disk with n >= 2.
Point evaluate(const Point& z, const MapParams& p);

// Beltrami coefficient mu = f_zbar / f_z at z. Zero on the quadratic piece
// and the pure-scaling pieces, |mu| = (K-1)/(K+1) on the radial-stretch
// collars, and a radius-dependent value on the interpolating annuli. Throws
// std::domain_error within relative distance 1e-12 of any gluing circle,
// where the one-sided derivatives disagree.
Complex beltrami(const Point& z, const MapParams& p);

struct Preimage {
    Point z;
    int local_index = 1;  // multiplicity; 2 only at the branch point
};

// Full preimage fiber of w. Candidates from the quadratic branch, a Newton
// solve on the interpolating annuli, and the closed-form inverses of the
// piecewise-defined interior branches; everything is verified by forward
// evaluation before being returned. Total local index is always the degree.
std::vector<Preimage> preimages(const Point& w, const MapParams& p);

struct GluingReport {
    double max_relative_mismatch = 0.0;
    // inner annulus edge, outer annulus edge, X/Y collar seam, child seam
    std::array<double, 4> per_seam{};
    long samples = 0;
};

// Samples the four seam families and compares the adjacent definitions.
GluingReport gluing_check(const MapParams& p, int samples_per_seam,
                          int max_depth, std::uint64_t seed);

namespace detail {

// Direct piece evaluators, exposed for seam and derivative tests. No region
// resolution: the caller asserts membership.
Complex eval_quad(const Complex& z, const MapParams& p);
Complex eval_annulus(const Complex& z, int sign, const MapParams& p);
Point eval_scaling_piece(const Word& u, const Complex& eta, const MapParams& p);  // X(u)
Point eval_stretch_piece(const Word& u, const Complex& eta, const MapParams& p);  // Y(u)

// Lift an anchored point one level up (n=1 lifts to an absolute point).
Point lift(const Point& p, const ScaleTable& st);

struct Resolved {
    RegionTag tag = RegionTag::ZQuad;
    Word word;
    Point pt;  // re-anchored at `word` for X/Y/CantorApprox, absolute for Z
};

// stop_depth < 0 disables the cutoff.
Resolved resolve(Point p, const MapParams& par, int stop_depth);

}  // namespace detail

}  // namespace qr
