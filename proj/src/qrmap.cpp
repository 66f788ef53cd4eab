#include "qr/qrmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qr/rng.hpp"

namespace qr {

namespace {

constexpr double kSeamTol = 1e-12;

bool finite(const Complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

std::string fmt(double x) { return std::to_string(x); }

}  // namespace

MapParams make_map_params(double K, std::optional<double> delta_opt, int depth_cutoff) {
    if (!std::isfinite(K) || !(K > 1.0) || !(K < 2.0))
        throw std::invalid_argument("K must lie in (1,2), got " + fmt(K));
    if (depth_cutoff < 1)
        throw std::invalid_argument("depth cutoff must be >= 1, got " + std::to_string(depth_cutoff));

    const double cap_construction = 1.0 / 14.0;
    const double cap_dilatation = (K - 1.0) / (8.0 * K - 6.0);
    double delta = delta_opt ? *delta_opt
                             : 0.9 * std::min(cap_construction, cap_dilatation);
    if (!std::isfinite(delta) || !(delta > 0.0) || !(delta < cap_construction))
        throw std::invalid_argument("delta must satisfy 0 < delta < 1/14, got " + fmt(delta));
    if (delta > cap_dilatation) {
        double ceiling = (1.0 - 6.0 * delta) / (1.0 - 8.0 * delta);
        throw std::invalid_argument(
            "annulus dilatation (1-6*delta)/(1-8*delta) = " + fmt(ceiling) +
            " exceeds K = " + fmt(K) + "; need delta <= " + fmt(cap_dilatation));
    }

    MapParams p;
    p.K = K;
    p.delta = delta;
    p.lambda = 2.0 * std::exp(1.0) / delta;
    p.alpha = 0.25 * delta;
    p.t0 = 4.0 * std::exp(1.0);
    p.s0 = 4.0;
    p.depth_cutoff = depth_cutoff;
    p.scales = ScaleTable::build(K, delta, std::max(64, depth_cutoff + 2));
    return p;
}

Point anchored_point(Word anchor, const Complex& offset) {
    if (!finite(offset))
        throw std::invalid_argument("anchored point needs a finite offset");
    return Point{std::move(anchor), offset};
}

Complex to_complex(const Point& p, const ScaleTable& st) {
    if (p.anchor.empty()) return p.offset;
    double c = center_of(p.anchor, st);
    return c + p.offset * std::exp(st.log_t[p.anchor.size()]);
}

double log_point_distance(const Point& a, const Point& b, const ScaleTable& st) {
    if (a.anchor.empty() || b.anchor.empty())
        return std::log(std::abs(to_complex(a, st) - to_complex(b, st)));

    std::size_t na = a.anchor.size(), nb = b.anchor.size();
    std::size_t p = common_prefix_length(a.anchor, b.anchor);
    if (p == na && p == nb)
        return std::log(std::abs(a.offset - b.offset)) + st.log_t[na];

    // Rebase everything on the largest scale still in play, so every term
    // carries a non-positive exponent and nothing underflows prematurely.
    double base;
    Complex acc{0.0, 0.0};
    if (p < na && p < nb) {
        base = st.log_r[p + 1];  // first differing letter dominates
        for (std::size_t j = p + 1; j <= na; ++j)
            acc += static_cast<double>(a.anchor[j - 1]) * std::exp(st.log_r[j] - base);
        for (std::size_t j = p + 1; j <= nb; ++j)
            acc -= static_cast<double>(b.anchor[j - 1]) * std::exp(st.log_r[j] - base);
        acc += a.offset * std::exp(st.log_t[na] - base);
        acc -= b.offset * std::exp(st.log_t[nb] - base);
    } else {
        // One word is a prefix of the other.
        const Point& s = (p == na) ? a : b;  // shorter
        const Point& l = (p == na) ? b : a;
        double sign = (p == na) ? 1.0 : -1.0;
        base = st.log_t[p];
        acc = s.offset;
        for (std::size_t j = p + 1; j <= l.anchor.size(); ++j)
            acc -= static_cast<double>(l.anchor[j - 1]) * std::exp(st.log_r[j] - base);
        acc -= l.offset * std::exp(st.log_t[l.anchor.size()] - base);
        acc *= sign;
    }
    return std::log(std::abs(acc)) + base;
}

std::string region_tag_name(RegionTag tag) {
    switch (tag) {
        case RegionTag::ZQuad: return "ZQuad";
        case RegionTag::ZAnnulusPlus: return "ZAnnulusPlus";
        case RegionTag::ZAnnulusMinus: return "ZAnnulusMinus";
        case RegionTag::X: return "X";
        case RegionTag::Y: return "Y";
        case RegionTag::CantorApprox: return "CantorApprox";
    }
    return "?";
}

namespace detail {

Point lift(const Point& p, const ScaleTable& st) {
    std::size_t n = p.anchor.size();
    if (n == 0) throw std::domain_error("lift of an absolute point");
    double last = p.anchor[n - 1];
    if (n == 1)
        return Point{Word{}, last + p.offset * std::exp(st.log_t[1])};
    Word parent = p.anchor.prefix(n - 1);
    double spacing = std::exp(st.log_r[n] - st.log_t[n - 1]);
    double ratio = std::exp(st.log_t[n] - st.log_t[n - 1]);
    return Point{std::move(parent), last * spacing + p.offset * ratio};
}

Resolved resolve(Point p, const MapParams& par, int stop_depth) {
    const ScaleTable& st = par.scales;
    if (p.anchor.empty() && !finite(p.offset))
        return {RegionTag::ZQuad, Word{}, p};  // escaped past the double range

    while (!p.anchor.empty() && std::abs(p.offset) > 1.0)
        p = lift(p, st);

    if (p.anchor.empty()) {
        const Complex& z = p.offset;
        double d1 = std::abs(z - 1.0);
        double dm = std::abs(z + 1.0);
        double two_delta = 2.0 * par.delta;
        if (d1 >= two_delta && dm >= two_delta) return {RegionTag::ZQuad, Word{}, p};
        if (d1 >= par.delta && d1 < two_delta) return {RegionTag::ZAnnulusPlus, Word{}, p};
        if (dm >= par.delta && dm < two_delta) return {RegionTag::ZAnnulusMinus, Word{}, p};
        int eps = (d1 < par.delta) ? 1 : -1;
        Complex v = z - static_cast<double>(eps);
        p = Point{Word::single(eps), v * std::exp(-st.log_t[1])};
    }

    for (;;) {
        int n = static_cast<int>(p.anchor.size());
        if (stop_depth >= 0 && n >= stop_depth)
            return {RegionTag::CantorApprox, p.anchor.prefix(stop_depth), p};

        bool at_center = (p.offset == Complex(0.0, 0.0));
        double log_m = at_center ? -std::numeric_limits<double>::infinity()
                                 : std::log(std::abs(p.offset));
        if (log_m >= -st.K_pow[n]) return {RegionTag::Y, p.anchor, p};
        if (n + 1 > st.max_depth()) return {RegionTag::X, p.anchor, p};

        // Position in units of t_n scaled up by e^{K^n}: the two children sit
        // at +-1/4 with radius alpha on this scale, independent of the level.
        // An overflow to inf just means "nowhere near a child".
        Complex scaled = at_center ? Complex(0.0, 0.0)
                                   : p.offset * std::exp(st.K_pow[n]);
        int eps = 0;
        if (std::abs(scaled - 0.25) < par.alpha) eps = 1;
        else if (std::abs(scaled + 0.25) < par.alpha) eps = -1;
        if (eps == 0) return {RegionTag::X, p.anchor, p};
        p = Point{child(p.anchor, eps), (scaled - 0.25 * eps) / par.alpha};
    }
}

Complex eval_quad(const Complex& z, const MapParams& p) {
    return p.lambda * (z * z - 1.0);
}

Complex eval_annulus(const Complex& z, int sign, const MapParams& p) {
    Complex v = z - static_cast<double>(sign);
    double beta = (std::abs(v) - p.delta) / p.delta;
    return p.lambda * v * (beta * v + 2.0 * sign);
}

Point eval_scaling_piece(const Word& u, const Complex& eta, const MapParams& p) {
    const ScaleTable& st = p.scales;
    std::size_t n = u.size();
    if (n == 0) throw std::domain_error("scaling piece needs a nonempty address");
    double u1 = u[0];
    Complex eta_out = (eta == Complex(0.0, 0.0))
        ? Complex(0.0, 0.0)
        : u1 * eta * std::exp(st.K_pow[n] - st.K_pow[n - 1]);
    if (n == 1) return absolute_point(eta_out * std::exp(st.log_t[0]));
    return Point{shift_tau(u), eta_out};
}

Point eval_stretch_piece(const Word& u, const Complex& eta, const MapParams& p) {
    const ScaleTable& st = p.scales;
    std::size_t n = u.size();
    if (n == 0) throw std::domain_error("stretch piece needs a nonempty address");
    if (eta == Complex(0.0, 0.0)) throw std::domain_error("stretch piece is undefined at the center");
    double u1 = u[0];
    double m = std::abs(eta);
    double log_mag = -st.K_pow[n - 1] + (std::log(m) + st.K_pow[n]) / p.K;
    Complex eta_out = (u1 * std::exp(log_mag) / m) * eta;
    if (n == 1) return absolute_point(eta_out * std::exp(st.log_t[0]));
    return Point{shift_tau(u), eta_out};
}

}  // namespace detail

Region classify(const Point& z, const MapParams& p) {
    auto r = detail::resolve(z, p, p.depth_cutoff);
    return Region{r.tag, r.word};
}

Point evaluate(const Point& z, const MapParams& p) {
    auto r = detail::resolve(z, p, -1);
    switch (r.tag) {
        case RegionTag::ZQuad:
            return absolute_point(detail::eval_quad(r.pt.offset, p));
        case RegionTag::ZAnnulusPlus:
            return absolute_point(detail::eval_annulus(r.pt.offset, 1, p));
        case RegionTag::ZAnnulusMinus:
            return absolute_point(detail::eval_annulus(r.pt.offset, -1, p));
        case RegionTag::Y:
            return detail::eval_stretch_piece(r.word, r.pt.offset, p);
        default:
            return detail::eval_scaling_piece(r.word, r.pt.offset, p);
    }
}

Complex beltrami(const Point& z, const MapParams& par) {
    auto r = detail::resolve(z, par, -1);
    const ScaleTable& st = par.scales;
    auto seam = [] { return std::domain_error("point lies on a gluing circle; one-sided derivatives differ"); };

    switch (r.tag) {
        case RegionTag::ZQuad: {
            const Complex& zz = r.pt.offset;
            for (int sg : {1, -1}) {
                double d = std::abs(zz - static_cast<double>(sg));
                if (std::abs(d - 2.0 * par.delta) < kSeamTol * 2.0 * par.delta) throw seam();
            }
            return Complex(0.0, 0.0);
        }
        case RegionTag::ZAnnulusPlus:
        case RegionTag::ZAnnulusMinus: {
            int sg = (r.tag == RegionTag::ZAnnulusPlus) ? 1 : -1;
            Complex v = r.pt.offset - static_cast<double>(sg);
            double m = std::abs(v);
            if (std::abs(m - par.delta) < kSeamTol * par.delta ||
                std::abs(m - 2.0 * par.delta) < kSeamTol * par.delta)
                throw seam();
            Complex fz = par.lambda * ((2.5 / par.delta) * v * m + 2.0 * static_cast<double>(sg) - 2.0 * v);
            Complex fzbar = par.lambda * v * v * v / (2.0 * par.delta * m);
            return fzbar / fz;
        }
        case RegionTag::Y: {
            std::size_t n = r.word.size();
            const Complex& eta = r.pt.offset;
            double m = std::abs(eta);
            if (std::abs(m - 1.0) < kSeamTol) throw seam();
            if (std::abs(std::log(m) + st.K_pow[n]) < kSeamTol) throw seam();
            Complex dir = eta / m;
            return ((1.0 - par.K) / (1.0 + par.K)) * dir * dir;
        }
        default: {  // X
            std::size_t n = r.word.size();
            const Complex& eta = r.pt.offset;
            if (eta != Complex(0.0, 0.0)) {
                double log_m = std::log(std::abs(eta));
                if (log_m + st.K_pow[n] > -kSeamTol) throw seam();  // collar seam
                Complex scaled = eta * std::exp(st.K_pow[n]);
                for (int eps : {1, -1}) {
                    double d = std::abs(scaled - 0.25 * eps);
                    if (std::isfinite(d) && std::abs(d - par.alpha) < kSeamTol * par.alpha) throw seam();
                }
            }
            return Complex(0.0, 0.0);
        }
    }
}

namespace {

// Newton iteration in Wirtinger form for the annulus piece: solves
// F(v) = lambda*v*(beta(v)*v + 2*sg) = w for v, treating F as a function of
// (v, conj v). The linearization a*dv + b*conj(dv) = -F inverts explicitly.
bool annulus_solve(const Complex& w, int sg, const MapParams& par, Complex seed, Complex& out) {
    Complex v = seed;
    double target = 1e-12 * std::max(1.0, std::abs(w));
    for (int it = 0; it < 80; ++it) {
        double m = std::abs(v);
        if (!(m > 0.0) || !std::isfinite(m)) return false;
        double beta = (m - par.delta) / par.delta;
        Complex F = par.lambda * v * (beta * v + 2.0 * static_cast<double>(sg)) - w;
        if (std::abs(F) <= target) { out = v; return true; }
        Complex a = par.lambda * ((2.5 / par.delta) * v * m + 2.0 * static_cast<double>(sg) - 2.0 * v);
        Complex b = par.lambda * v * v * v / (2.0 * par.delta * m);
        double det = std::norm(a) - std::norm(b);
        if (!(std::abs(det) > 0.0)) return false;
        Complex dv = (b * std::conj(F) - std::conj(a) * F) / det;
        double step = std::abs(dv);
        if (step > par.delta) dv *= par.delta / step;  // stay within the band
        v += dv;
    }
    return false;
}

}  // namespace

std::vector<Preimage> preimages(const Point& w, const MapParams& par) {
    const ScaleTable& st = par.scales;
    Complex wa = to_complex(w, st);
    double aw = std::abs(wa);
    std::vector<Preimage> found;

    auto verified = [&](const Point& cand) {
        Point img = evaluate(cand, par);
        double ld = log_point_distance(img, w, st);
        return ld <= std::log(1e-9) + std::log(std::max(1.0, aw));
    };
    auto in_zquad = [&](const Complex& z) {
        return std::abs(z - 1.0) >= 2.0 * par.delta && std::abs(z + 1.0) >= 2.0 * par.delta;
    };

    // Quadratic branch: z = +-sqrt(1 + w/lambda), valid where the pure
    // quadratic formula owns the plane.
    if (std::isfinite(aw)) {
        Complex root = std::sqrt(1.0 + wa / par.lambda);
        if (std::abs(root) <= 5e-10) {
            Point cand = absolute_point(Complex(0.0, 0.0));  // branch point, f(0) = -lambda
            if (verified(cand)) found.push_back({cand, 2});
        } else {
            for (const Complex& z : {root, -root}) {
                if (!in_zquad(z)) continue;
                Point cand = absolute_point(z);
                if (verified(cand)) found.push_back({cand, 1});
            }
        }
    }

    // Interpolating annuli: only reachable for |w| inside the image band.
    double band_lo = 0.999 * par.t0;
    double band_hi = 1.001 * par.t0 * (2.0 + 2.0 * par.delta);
    if (std::isfinite(aw) && aw >= band_lo && aw <= band_hi) {
        for (int sg : {1, -1}) {
            std::vector<Complex> seeds;
            seeds.push_back(wa / (2.0 * static_cast<double>(sg) * par.lambda));
            for (double rad : {1.2 * par.delta, 1.7 * par.delta})
                for (int k = 0; k < 8; ++k) {
                    double phi = 0.78539816339744830961 * k;  // pi/4 steps
                    seeds.emplace_back(rad * std::cos(phi), rad * std::sin(phi));
                }
            for (const Complex& seed : seeds) {
                Complex v;
                if (!annulus_solve(wa, sg, par, seed, v)) continue;
                double m = std::abs(v);
                if (!(m >= par.delta && m < 2.0 * par.delta)) continue;  // outside this piece
                Point cand = absolute_point(static_cast<double>(sg) + v);
                if (verified(cand)) found.push_back({cand, 1});
            }
        }
    }

    // Piecewise interior branches: w sitting in a level-n piece pulls back
    // into the two level-(n+1) children whose shift is that address.
    auto rw = detail::resolve(w, par, -1);
    bool have_v = false, y_case = false;
    Word v_word;
    Complex eta_w{0.0, 0.0};
    if (rw.tag == RegionTag::X || rw.tag == RegionTag::Y) {
        have_v = true;
        y_case = (rw.tag == RegionTag::Y);
        v_word = rw.word;
        eta_w = rw.pt.offset;
    } else if (std::isfinite(aw) &&
               std::abs(wa - 1.0) >= par.delta && std::abs(wa + 1.0) >= par.delta) {
        // The top-level pieces around the origin carry the empty address.
        if (aw < par.s0) { have_v = true; y_case = false; }
        else if (aw <= par.t0) { have_v = true; y_case = true; }
        if (have_v) eta_w = wa * std::exp(-st.log_t0);
    }
    if (have_v && static_cast<int>(v_word.size()) + 1 <= st.max_depth()) {
        std::size_t n = v_word.size() + 1;
        for (int eps : {1, -1}) {
            Word u = Word::single(eps);
            for (std::size_t j = 0; j < v_word.size(); ++j) u.push_back(eps * v_word[j]);
            Complex eta_z;
            if (y_case) {
                double m = std::abs(eta_w);
                if (!(m > 0.0)) continue;
                double log_mag = par.K * (std::log(m) + st.K_pow[n - 1]) - st.K_pow[n];
                eta_z = (static_cast<double>(eps) * std::exp(log_mag) / m) * eta_w;
            } else {
                eta_z = (eta_w == Complex(0.0, 0.0))
                    ? Complex(0.0, 0.0)
                    : static_cast<double>(eps) * eta_w * std::exp(st.K_pow[n - 1] - st.K_pow[n]);
            }
            Point cand{u, eta_z};
            if (verified(cand)) found.push_back({cand, 1});
        }
    }

    // Deduplicate (seam points are produced by both adjacent branches) and
    // fix a deterministic order.
    std::vector<Preimage> out;
    for (const auto& c : found) {
        bool dup = false;
        for (const auto& d : out) {
            double ld = log_point_distance(c.z, d.z, st);
            double sc = std::max(1.0, std::abs(to_complex(d.z, st)));
            if (ld <= std::log(1e-9) + std::log(sc)) { dup = true; break; }
        }
        if (!dup) out.push_back(c);
    }
    std::sort(out.begin(), out.end(), [&](const Preimage& a, const Preimage& b) {
        Complex za = to_complex(a.z, st), zb = to_complex(b.z, st);
        if (za.real() != zb.real()) return za.real() < zb.real();
        if (za.imag() != zb.imag()) return za.imag() < zb.imag();
        return a.z.anchor < b.z.anchor;
    });
    return out;
}

GluingReport gluing_check(const MapParams& par, int samples_per_seam,
                          int max_depth, std::uint64_t seed) {
    const ScaleTable& st = par.scales;
    if (samples_per_seam < 1) throw std::invalid_argument("need at least one sample per seam");
    if (max_depth < 1) max_depth = 1;
    // Keep e^{-K^n} in the normal range; far deeper seams are not
    // representable as offsets anyway.
    while (max_depth > 1 && st.K_pow[max_depth] > 700.0) --max_depth;
    if (max_depth + 1 > st.max_depth()) max_depth = st.max_depth() - 1;

    Rng rng(seed);
    GluingReport rep{};
    auto rel = [](const Complex& a, const Complex& b) {
        double m = std::max(std::abs(a), std::abs(b));
        return m == 0.0 ? 0.0 : std::abs(a - b) / m;
    };
    auto note = [&rep](int seam, double v) {
        rep.per_seam[seam] = std::max(rep.per_seam[seam], v);
        rep.max_relative_mismatch = std::max(rep.max_relative_mismatch, v);
        ++rep.samples;
    };

    for (int i = 0; i < samples_per_seam; ++i) {
        // Inner edge of the interpolating annulus against the level-1 collar.
        int sg = rng.sign();
        Complex dir = rng.on_circle(1.0);
        Complex z = static_cast<double>(sg) + par.delta * dir;
        Complex f_ann = detail::eval_annulus(z, sg, par);
        Point f_col = detail::eval_stretch_piece(Word::single(sg),
                                                 (par.delta * dir) * std::exp(-st.log_t[1]), par);
        note(0, rel(f_ann, f_col.offset));

        // Outer edge of the annulus against the plain quadratic.
        sg = rng.sign();
        dir = rng.on_circle(1.0);
        z = static_cast<double>(sg) + 2.0 * par.delta * dir;
        note(1, rel(detail::eval_quad(z, par), detail::eval_annulus(z, sg, par)));

        // Collar seam |eta| = s_n/t_n inside a random address.
        int n = 1 + static_cast<int>(rng.index(max_depth));
        Word u;
        for (int j = 0; j < n; ++j) u.push_back(rng.sign());
        Complex eta = std::exp(-st.K_pow[n]) * rng.on_circle(1.0);
        Point fX = detail::eval_scaling_piece(u, eta, par);
        Point fY = detail::eval_stretch_piece(u, eta, par);
        note(2, rel(fX.offset, fY.offset));

        // Child seam: the boundary circle of a level-(n+1) disk seen from the
        // parent scaling piece and from the child collar.
        n = 1 + static_cast<int>(rng.index(max_depth));
        u = Word{};
        for (int j = 0; j < n; ++j) u.push_back(rng.sign());
        int epsc = rng.sign();
        dir = rng.on_circle(1.0);
        double q = 0.25 * std::exp(-st.K_pow[n]);
        double rho = par.alpha * std::exp(-st.K_pow[n]);
        Point pX = detail::eval_scaling_piece(u, static_cast<double>(epsc) * q + rho * dir, par);
        Point pY = detail::eval_stretch_piece(child(u, epsc), dir, par);
        Point pY_lifted = detail::lift(pY, st);
        note(3, rel(pX.offset, pY_lifted.offset));
    }
    return rep;
}

}  // namespace qr
