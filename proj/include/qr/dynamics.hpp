#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "qr/qrmap.hpp"

namespace qr {

enum class OrbitOutcome : std::uint8_t { Escaped, BoundedApprox };

struct OrbitRecord {
    OrbitOutcome outcome = OrbitOutcome::BoundedApprox;
    int escape_step = -1;       // first k >= 1 with |z_k| >= s0 (Escaped only)
    int steps_certified = 0;    // BoundedApprox: full steps taken before stopping
    bool hit_depth_cutoff = false;
    std::vector<Region> trace;  // region of z_0, z_1, ... in visit order
    std::vector<Point> orbit;   // z_1, z_2, ...
};

// Iterates until |z_k| >= s0 = 4 (the absorbing zone: from there moduli grow
// by a factor >= 3 per step), the classification hits the depth cutoff, or
// max_steps runs out.
OrbitRecord escape_time(const Point& z0, const MapParams& p, int max_steps);

struct RenderConfig {
    int px = 512;
    int max_iter = 64;
    Complex center{0.0, 0.0};
    double width = 8.0;
    int workers = 0;  // 0 = hardware concurrency
};

// Escape-time image, row-major from the top-left. Pixel value is the escape
// step clamped to 255, or 0 for points still bounded after max_iter (or
// descended past the cutoff). Output is byte-identical for any worker count.
std::vector<std::uint8_t> render_grid(const MapParams& p, const RenderConfig& cfg);

void write_pgm(std::ostream& os, const std::vector<std::uint8_t>& pixels, int px);

struct HolderReport {
    double M_est = 0.0;      // sup chi(f z, f w) / chi(z, w)^(1/K) over the calibration sample
    double L_est = 0.0;      // M^(K/(K-1)), the constant for the iterated bound
    double worst_ratio = 0.0;  // sup over fresh pairs, k <= max_iter, of
                               // chi(f^k z, f^k w) / (L * chi(z, w)^(K^-k))
    int pairs = 0;
    int max_iter = 0;
};

// Empirical check of the uniform Hoelder control of iterates in the chordal
// metric; worst_ratio <= 1 means the sampled pairs obey the bound.
HolderReport holder_diagnostic(const MapParams& p, int pairs, int max_iter,
                               std::uint64_t seed);

}  // namespace qr
