#include "qr/dynamics.hpp"

#include <atomic>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "qr/rng.hpp"

namespace qr {

OrbitRecord escape_time(const Point& z0, const MapParams& p, int max_steps) {
    if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
    OrbitRecord rec;
    Point z = z0;
    for (int k = 1; k <= max_steps; ++k) {
        Region rg = classify(z, p);
        rec.trace.push_back(rg);
        if (rg.tag == RegionTag::CantorApprox) {
            rec.outcome = OrbitOutcome::BoundedApprox;
            rec.steps_certified = k - 1;
            rec.hit_depth_cutoff = true;
            return rec;
        }
        z = evaluate(z, p);
        rec.orbit.push_back(z);
        if (std::abs(to_complex(z, p.scales)) >= p.s0) {
            rec.outcome = OrbitOutcome::Escaped;
            rec.escape_step = k;
            rec.trace.push_back(classify(z, p));  // region the orbit escaped into
            return rec;
        }
    }
    rec.outcome = OrbitOutcome::BoundedApprox;
    rec.steps_certified = max_steps;
    return rec;
}

namespace {

int escape_steps_quick(Point z, const MapParams& p, int max_iter) {
    for (int k = 1; k <= max_iter; ++k) {
        if (classify(z, p).tag == RegionTag::CantorApprox) return 0;
        z = evaluate(z, p);
        if (std::abs(to_complex(z, p.scales)) >= p.s0) return k;
    }
    return 0;
}

}  // namespace

std::vector<std::uint8_t> render_grid(const MapParams& p, const RenderConfig& cfg) {
    if (cfg.px < 1) throw std::invalid_argument("grid size must be >= 1");
    if (cfg.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
    if (!(cfg.width > 0.0)) throw std::invalid_argument("view width must be positive");

    int workers = cfg.workers;
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    if (workers > cfg.px) workers = cfg.px;

    const int px = cfg.px;
    const double step = cfg.width / px;
    std::vector<std::uint8_t> img(static_cast<std::size_t>(px) * px);
    std::atomic<int> next_row{0};

    auto body = [&] {
        for (;;) {
            int row = next_row.fetch_add(1, std::memory_order_relaxed);
            if (row >= px) return;
            double im = cfg.center.imag() + 0.5 * cfg.width - (row + 0.5) * step;
            std::uint8_t* line = img.data() + static_cast<std::size_t>(row) * px;
            for (int col = 0; col < px; ++col) {
                double re = cfg.center.real() - 0.5 * cfg.width + (col + 0.5) * step;
                int esc = escape_steps_quick(absolute_point(Complex(re, im)), p, cfg.max_iter);
                line[col] = static_cast<std::uint8_t>(esc > 255 ? 255 : esc);
            }
        }
    };

    std::vector<std::thread> pool;
    for (int i = 1; i < workers; ++i) pool.emplace_back(body);
    body();
    for (auto& th : pool) th.join();
    return img;
}

void write_pgm(std::ostream& os, const std::vector<std::uint8_t>& pixels, int px) {
    if (px < 1 || pixels.size() != static_cast<std::size_t>(px) * px)
        throw std::invalid_argument("pixel buffer does not match the grid size");
    os << "P5\n" << px << ' ' << px << "\n255\n";
    os.write(reinterpret_cast<const char*>(pixels.data()),
             static_cast<std::streamsize>(pixels.size()));
}

HolderReport holder_diagnostic(const MapParams& p, int pairs, int max_iter,
                               std::uint64_t seed) {
    if (pairs < 1) throw std::invalid_argument("need at least one sample pair");
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");

    HolderReport rep;
    rep.pairs = pairs;
    rep.max_iter = max_iter;

    auto chi_of = [&](const Point& a, const Point& b) {
        return chordal_distance(to_complex(a, p.scales), to_complex(b, p.scales));
    };

    // Calibration pass: one application of the map.
    Rng cal(seed);
    double M = 0.0;
    for (int i = 0; i < pairs; ++i) {
        Point z = absolute_point(cal.in_disk(Complex(0.0, 0.0), p.t0));
        Point w = absolute_point(cal.in_disk(Complex(0.0, 0.0), p.t0));
        double chi0 = chi_of(z, w);
        if (chi0 < 1e-14) continue;
        double chi1 = chi_of(evaluate(z, p), evaluate(w, p));
        M = std::max(M, chi1 / std::pow(chi0, 1.0 / p.K));
    }
    rep.M_est = M;
    rep.L_est = std::pow(M, p.K / (p.K - 1.0));

    // Fresh sample: check the iterated bound with the calibrated constant.
    Rng fresh(seed ^ 0x9e3779b97f4a7c15ULL);
    double worst = 0.0;
    for (int i = 0; i < pairs; ++i) {
        Point z = absolute_point(fresh.in_disk(Complex(0.0, 0.0), p.t0));
        Point w = absolute_point(fresh.in_disk(Complex(0.0, 0.0), p.t0));
        double chi0 = chi_of(z, w);
        if (chi0 < 1e-14) continue;
        for (int k = 1; k <= max_iter; ++k) {
            z = evaluate(z, p);
            w = evaluate(w, p);
            double bound = rep.L_est * std::pow(chi0, std::exp(-k * std::log(p.K)));
            worst = std::max(worst, chi_of(z, w) / bound);
        }
    }
    rep.worst_ratio = worst;
    return rep;
}

}  // namespace qr
