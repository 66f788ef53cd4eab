#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "qr/geometry.hpp"
#include "qr/qrmap.hpp"

namespace qr {

// A map that can be iterated backwards: evaluator, full-fiber preimage
// operator with local indices, and the finite critical values. Instances:
// the analytic oracle z^2 + c (dilatation 1) and the piecewise map.
struct MapInstance {
    std::string name;
    int degree = 2;
    double dilatation = 1.0;
    std::shared_ptr<const MapParams> params;  // null for analytic instances
    std::function<Point(const Point&)> eval;
    std::function<std::vector<Preimage>(const Point&)> preimage_op;
    std::vector<std::pair<Complex, int>> critical_values;  // (value, local index at the critical point)
};

MapInstance make_quadratic_instance(const Complex& c);
MapInstance make_piecewise_instance(const MapParams& p);

struct TreeNode {
    Point z;
    int local_index = 1;
    long long path_weight = 1;  // product of local indices back to the root
    int parent = -1;            // index into the previous level
};

// Backward-orbit tree: levels[m] is the m-th preimage fiber of the base
// point, deduplicated to distinct points (path weights of merged duplicates
// accumulate, so the with-multiplicity count stays exact).
struct PullbackTree {
    std::vector<std::vector<TreeNode>> levels;
    int depth() const { return static_cast<int>(levels.size()) - 1; }
};

// For instances with dilatation > 1 the base point is first certified
// non-exceptional (backward orbit rich enough); a failed certificate is an
// std::invalid_argument. A throwing preimage operator is reported together
// with the node it failed on. workers parallelizes fiber expansion per
// level; results do not depend on it.
PullbackTree build_tree(const MapInstance& inst, const Point& xi, int depth,
                        int workers = 1);

struct LevelCounts {
    std::vector<long long> counts;       // N_m, distinct
    std::vector<long long> weight_sums;  // sum of path weights = degree^m
    bool growth_ok = true;               // N_{m+1} - 2 >= d (N_m - 2) at every level
    bool lower_ok = true;                // N_m >= d^(m-6) for m >= 6
    bool weights_ok = true;              // weight sums match degree^m exactly
    long long growth_margin = 0;         // min over levels of (N_{m+1}-2) - d(N_m-2)
    long long lower_margin = 0;          // min over m >= 6 of N_m - d^(m-6)
};

LevelCounts level_count_check(const PullbackTree& t, int degree);

// Largest relative residual |f(node) - parent| / max(1, |parent|) over all
// tree edges.
double max_forward_residual(const PullbackTree& t, const MapInstance& inst);

// Distinct size of the 6th preimage fiber. Three or more distinct points
// certify that the base point has an infinite backward orbit (it is not
// exceptional); 1 or 2 withholds the certificate.
long long exceptional_point_check(const MapInstance& inst, const Point& xi);

enum class MassMetric : std::uint8_t { Euclidean, Chordal };

struct MassRow {
    int center;         // index into the sampled centers
    double neg_log_r;
    double mu;          // fraction of the support inside the ball
    double gauge;       // h(r)
    double ratio;       // mu / h(r)
};

struct MassReport {
    double C_est = 0.0;
    std::vector<int> center_indices;  // into the deepest level, sorted
    std::vector<MassRow> rows;
};

// Empirical measure of the deepest level (uniform weight on each distinct
// point) probed on balls around sampled support centers. gauge_from_log maps
// -log r to h(r); radii are passed as -log r and must be positive (r < 1).
MassReport mass_distribution(const PullbackTree& t, const MapInstance& inst,
                             const std::function<double(double)>& gauge_from_log,
                             const std::vector<double>& neg_log_radii,
                             int centers, MassMetric metric, std::uint64_t seed);

MassReport mass_distribution(const PullbackTree& t, const MapInstance& inst,
                             const Gauge& g, const std::vector<double>& neg_log_radii,
                             int centers, MassMetric metric, std::uint64_t seed);

// Number of connected components of the preimage of the disk D(center,
// radius): degree minus the branching absorbed by critical values inside.
int expected_components(const MapInstance& inst, const Complex& center, double radius);

struct NamedCheck {
    std::string name;
    bool pass = false;
    double value = 0.0;
};

struct PullbackReport {
    std::string instance;  // echoed CLI/map descriptor
    std::string xi;
    int depth = 0;
    std::vector<long long> counts;
    std::vector<NamedCheck> checks;
    double C_est = 0.0;
    std::vector<MassRow> table;
};

// Fixed key order, 17-significant-digit floats: byte-stable output.
void write_report_json(std::ostream& os, const PullbackReport& rep);

}  // namespace qr
