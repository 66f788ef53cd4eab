#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qr/dynamics.hpp"
#include "qr/format.hpp"
#include "qr/hausdorff.hpp"
#include "qr/pullback.hpp"
#include "qr/qrmap.hpp"
#include "qr/rng.hpp"

namespace {

using namespace qr;

std::optional<double> parse_delta(const std::string& s) {
    if (s == "auto") return std::nullopt;
    size_t pos = 0;
    double v;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad --delta value: '" + s + "'");
    }
    if (pos != s.size()) throw std::invalid_argument("bad --delta value: '" + s + "'");
    return v;
}

std::ofstream open_out(const std::string& path, bool binary) {
    std::ofstream f(path, binary ? (std::ios::out | std::ios::binary) : std::ios::out);
    if (!f) throw std::invalid_argument("cannot open output file: " + path);
    return f;
}

struct CheckResult {
    std::string name;
    bool pass = false;
    long long samples = 0;
    double threshold = 0.0;
    double value = 0.0;
};

void write_verify_json(std::ostream& os, double K, double delta, std::uint64_t seed,
                       const std::vector<CheckResult>& checks, bool all_pass) {
    JsonWriter j(os);
    j.begin_object();
    j.kv("K", K);
    j.kv("all_pass", all_pass);
    j.begin_array("checks");
    for (const auto& c : checks) {
        j.begin_object_in_array();
        j.kv("name", c.name);
        j.kv("pass", c.pass);
        j.kv("samples", c.samples);
        j.kv("threshold", c.threshold);
        j.kv("value", c.value);
        j.end_object();
    }
    j.end_array();
    j.kv("delta", delta);
    j.kv("seed", static_cast<long long>(seed));
    j.end_object();
    os << '\n';
}

int cmd_verify(const MapParams& par, long long samples, int glue_samples, int seam_depth,
               std::uint64_t seed, const std::string& out_path) {
    std::vector<CheckResult> checks;

    {  // seam agreement between adjacent formula pieces
        GluingReport gr = gluing_check(par, glue_samples, seam_depth, seed);
        checks.push_back({"gluing_mismatch", gr.max_relative_mismatch <= 1e-9,
                          gr.samples, 1e-9, gr.max_relative_mismatch});
    }

    {  // both one-sided values on |z -+ 1| = delta have modulus t0
        Rng rng(seed + 1);
        long long n = std::min<long long>(samples, 20000);
        double worst = 0.0;
        for (long long i = 0; i < n; ++i) {
            int sg = rng.sign();
            Complex dir = rng.on_circle(1.0);
            Complex z = static_cast<double>(sg) + par.delta * dir;
            double m1 = std::abs(detail::eval_annulus(z, sg, par));
            Point col = detail::eval_stretch_piece(
                Word::single(sg), (par.delta * dir) * std::exp(-par.scales.log_t[1]), par);
            double m2 = std::abs(col.offset);
            worst = std::max({worst, std::abs(m1 - par.t0) / par.t0,
                              std::abs(m2 - par.t0) / par.t0});
        }
        checks.push_back({"seam_anchor_modulus", worst <= 1e-10, 2 * n, 1e-10, worst});
    }

    {  // dilatation bound on the interpolating annuli
        Rng rng(seed + 2);
        double bound = par.delta / (1.0 - 7.0 * par.delta);
        double worst = 0.0;
        long long n = samples;
        for (long long i = 0; i < n; ++i) {
            double sg = rng.sign();
            Complex v = rng.in_annulus(Complex(0, 0), par.delta * (1.0 + 1e-9),
                                       2.0 * par.delta * (1.0 - 1e-9));
            worst = std::max(worst, std::abs(beltrami(absolute_point(sg + v), par)));
        }
        checks.push_back({"annulus_dilatation_bound", worst <= bound + 1e-6, n, bound, worst});
    }

    {  // exact modulus (K-1)/(K+1) on the radial-stretch collars
        Rng rng(seed + 3);
        double target = (par.K - 1.0) / (par.K + 1.0);
        double worst_dev = 0.0;
        long long n = std::min<long long>(samples, 20000), used = 0;
        int depth_cap = 6;
        for (long long i = 0; i < n; ++i) {
            int d = 1 + static_cast<int>(rng.index(depth_cap));
            Word u;
            for (int j = 0; j < d; ++j) u.push_back(rng.sign());
            double log_m = rng.uniform(-par.scales.K_pow[d] * (1.0 - 1e-6), -1e-6);
            Complex eta = std::exp(log_m) * rng.on_circle(1.0);
            double mu;
            try {
                mu = std::abs(beltrami(anchored_point(u, eta), par));
            } catch (const std::domain_error&) {
                continue;  // landed on a seam circle
            }
            worst_dev = std::max(worst_dev, std::abs(mu - target));
            ++used;
        }
        checks.push_back({"collar_dilatation_exact", worst_dev <= 1e-6, used, 1e-6, worst_dev});
    }

    {  // mu vanishes on the conformal pieces
        Rng rng(seed + 4);
        double worst = 0.0;
        long long n = std::min<long long>(samples, 20000), used = 0;
        for (long long i = 0; i < n; ++i) {
            double mu;
            try {
                if (i % 2 == 0) {
                    Complex z = rng.in_disk(Complex(0, 0), 10.0);
                    if (std::abs(z - 1.0) < 2.2 * par.delta || std::abs(z + 1.0) < 2.2 * par.delta)
                        continue;
                    mu = std::abs(beltrami(absolute_point(z), par));
                } else {
                    int d = 1 + static_cast<int>(rng.index(6));
                    Word u;
                    for (int j = 0; j < d; ++j) u.push_back(rng.sign());
                    double log_m = rng.uniform(-par.scales.K_pow[d] - 4.0,
                                               -par.scales.K_pow[d] - 0.01);
                    Complex eta = std::exp(log_m) * rng.on_circle(1.0);
                    Point pt = anchored_point(u, eta);
                    if (classify(pt, par).tag != RegionTag::X) continue;
                    mu = std::abs(beltrami(pt, par));
                }
            } catch (const std::domain_error&) {
                continue;
            }
            worst = std::max(worst, mu);
            ++used;
        }
        checks.push_back({"conformal_regions_mu_zero", worst <= 1e-9, used, 1e-9, worst});
    }

    {  // |f| >= 4 away from the two excluded disks
        Rng rng(seed + 5);
        double min_mod = std::numeric_limits<double>::infinity();
        long long n = samples, used = 0;
        for (long long i = 0; i < n; ++i) {
            Complex z = rng.in_disk(Complex(0, 0), 10.0);
            if (std::abs(z - 1.0) < par.delta || std::abs(z + 1.0) < par.delta) continue;
            min_mod = std::min(min_mod, std::abs(to_complex(evaluate(absolute_point(z), par), par.scales)));
            ++used;
        }
        checks.push_back({"modulus_lower_bound_on_Z", min_mod >= 4.0, used, 4.0, min_mod});
    }

    {  // |f(z)| >= 3 |z| once |z| >= 4
        Rng rng(seed + 6);
        double min_ratio = std::numeric_limits<double>::infinity();
        long long n = samples;
        for (long long i = 0; i < n; ++i) {
            Complex z = rng.in_annulus(Complex(0, 0), 4.0, 100.0);
            double fz = std::abs(to_complex(evaluate(absolute_point(z), par), par.scales));
            min_ratio = std::min(min_ratio, fz / std::abs(z));
        }
        checks.push_back({"growth_outside_s0", min_ratio >= 3.0, n, 3.0, min_ratio});
    }

    bool all_pass = true;
    for (const auto& c : checks) all_pass = all_pass && c.pass;

    if (out_path.empty()) {
        write_verify_json(std::cout, par.K, par.delta, seed, checks, all_pass);
    } else {
        auto f = open_out(out_path, false);
        write_verify_json(f, par.K, par.delta, seed, checks, all_pass);
    }
    return all_pass ? 0 : 1;
}

int cmd_pullback(const MapParams& par, const std::string& map_str, const std::string& xi_str,
                 int depth, int centers, int radii_n, const std::string& metric_str,
                 std::uint64_t seed, int threads, const std::string& out_path) {
    MapInstance inst;
    bool is_explicit = false;
    if (map_str == "explicit" || map_str == "piecewise") {
        inst = make_piecewise_instance(par);
        is_explicit = true;
    } else if (map_str.rfind("quad:c=", 0) == 0) {
        inst = make_quadratic_instance(parse_complex(map_str.substr(7)));
    } else {
        throw std::invalid_argument("bad --map: '" + map_str + "' (use quad:c=<complex> or explicit)");
    }
    if (depth < 1 || depth > 24) throw std::invalid_argument("--depth must lie in [1,24]");
    if (radii_n < 1 || radii_n > 32) throw std::invalid_argument("--radii must lie in [1,32]");
    MassMetric metric;
    if (metric_str == "euclidean") metric = MassMetric::Euclidean;
    else if (metric_str == "chordal") metric = MassMetric::Chordal;
    else throw std::invalid_argument("bad --metric: '" + metric_str + "'");

    Point xi = absolute_point(parse_complex(xi_str));
    long long cert = exceptional_point_check(inst, xi);

    PullbackReport rep;
    rep.instance = map_str;
    rep.xi = xi_str;
    rep.depth = depth;
    rep.checks.push_back({"backward_orbit_certificate", cert >= 3, static_cast<double>(cert)});

    PullbackTree tree = build_tree(inst, xi, depth, std::max(1, threads));
    for (const auto& lvl : tree.levels) rep.counts.push_back(static_cast<long long>(lvl.size()));

    LevelCounts lc = level_count_check(tree, inst.degree);
    rep.checks.push_back({"level_growth_law", lc.growth_ok, static_cast<double>(lc.growth_margin)});
    rep.checks.push_back({"level_lower_bound", lc.lower_ok, static_cast<double>(lc.lower_margin)});
    rep.checks.push_back({"with_multiplicity_counts", lc.weights_ok,
                          static_cast<double>(lc.weight_sums.back())});

    double resid = max_forward_residual(tree, inst);
    rep.checks.push_back({"forward_verification", resid <= 1e-8, resid});

    // a withheld certificate leaves nothing meaningful to measure
    if (cert >= 3 && tree.levels.back().size() >= 2) {
        std::vector<double> neg_log_radii;
        if (is_explicit) {
            for (int j = 2; j < 2 + radii_n && j <= par.scales.max_depth(); ++j)
                neg_log_radii.push_back(-(std::log(2.0) + par.scales.log_s[j]));
        } else {
            double lo = std::log(2.0), hi = std::log(500.0);  // r from 0.5 down to 0.002
            for (int i = 0; i < radii_n; ++i)
                neg_log_radii.push_back(radii_n == 1 ? lo : lo + i * (hi - lo) / (radii_n - 1));
        }
        MassReport mass;
        if (is_explicit) {
            mass = mass_distribution(tree, inst, Gauge(inst.degree, par.K), neg_log_radii,
                                     centers, metric, seed);
        } else {
            mass = mass_distribution(tree, inst, [](double nl) { return std::exp(-nl); },
                                     neg_log_radii, centers, metric, seed);
        }
        rep.C_est = mass.C_est;
        rep.table = mass.rows;
    }

    bool all_pass = true;
    for (const auto& c : rep.checks) all_pass = all_pass && c.pass;

    if (out_path.empty()) {
        write_report_json(std::cout, rep);
    } else {
        auto f = open_out(out_path, false);
        write_report_json(f, rep);
    }
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Escape-time dynamics, seam verification, and backward-orbit "
                 "measure diagnostics for a piecewise quasiregular plane map"};
    app.require_subcommand(1);
    // accept the shared flags on either side of the subcommand name
    app.fallthrough();

    double K = 1.5;
    std::string delta_str = "auto";
    std::uint64_t seed = 42;
    int threads = 0;
    std::string out_path;
    app.add_option("--K", K, "dilatation parameter, in (1,2)")->capture_default_str();
    app.add_option("--delta", delta_str, "half-gap of the excluded disks, or 'auto'")
        ->capture_default_str();
    app.add_option("--seed", seed, "RNG seed")->capture_default_str();
    app.add_option("--threads", threads, "worker cap (0 = hardware)")->capture_default_str();
    app.add_option("--out", out_path, "output path (default: stdout)");

    auto* verify = app.add_subcommand("verify", "run the seam/dilatation/growth checks");
    long long samples = 100000;
    int glue_samples = 10000, seam_depth = 8;
    verify->add_option("--samples", samples, "samples per sampled check")->capture_default_str();
    verify->add_option("--glue-samples", glue_samples, "samples per seam family")
        ->capture_default_str();
    verify->add_option("--seam-depth", seam_depth, "max address depth for seam sampling")
        ->capture_default_str();

    auto* render = app.add_subcommand("render", "escape-time image (PGM)");
    int px = 512, max_iter = 64;
    std::string center_str = "0+0i";
    double width = 8.0;
    render->add_option("--px", px, "image size in pixels")->capture_default_str();
    render->add_option("--max-iter", max_iter, "iteration cap")->capture_default_str();
    render->add_option("--center", center_str, "view center (a+bi)")->capture_default_str();
    render->add_option("--width", width, "view width")->capture_default_str();

    auto* gauge = app.add_subcommand("gauge", "gauge cover sums CSV");
    int n_max = 40;
    gauge->add_option("--n-max", n_max, "deepest cover generation")->capture_default_str();

    auto* cantor = app.add_subcommand("cantor", "limit-set center approximants CSV");
    int level = 8;
    std::string boxdim_out, scales_out;
    cantor->add_option("--level", level, "word length (2^level rows)")->capture_default_str();
    cantor->add_option("--boxdim-out", boxdim_out, "also write the cover-sum CSV here");
    cantor->add_option("--n-max", n_max, "generations for --boxdim-out")->capture_default_str();
    cantor->add_option("--scales-out", scales_out, "also write the log-scale table here");

    auto* pullback = app.add_subcommand("pullback", "backward-orbit tree report (JSON)");
    std::string map_str = "explicit", xi_str = "-1+0i", metric_str = "euclidean";
    int depth = 8, centers = 32, radii_n = 6;
    pullback->add_option("--map", map_str, "quad:c=<complex> or explicit")->capture_default_str();
    pullback->add_option("--xi", xi_str, "base point (a+bi)")->capture_default_str();
    pullback->add_option("--depth", depth, "tree depth")->capture_default_str();
    pullback->add_option("--centers", centers, "sampled ball centers")->capture_default_str();
    pullback->add_option("--radii", radii_n, "number of ball radii")->capture_default_str();
    pullback->add_option("--metric", metric_str, "euclidean or chordal")->capture_default_str();

    auto* classify_cmd = app.add_subcommand("classify", "region of a point (JSON line)");
    std::string point_str;
    classify_cmd->add_option("--point", point_str, "point to classify (a+bi)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        MapParams par = make_map_params(K, parse_delta(delta_str));
        if (*verify) {
            if (samples < 1 || glue_samples < 1 || seam_depth < 1)
                throw std::invalid_argument("sample counts and seam depth must be positive");
            return cmd_verify(par, samples, glue_samples, seam_depth, seed, out_path);
        }
        if (*render) {
            if (out_path.empty()) throw std::invalid_argument("render needs --out");
            RenderConfig cfg;
            cfg.px = px;
            cfg.max_iter = max_iter;
            cfg.center = parse_complex(center_str);
            cfg.width = width;
            cfg.workers = threads;
            auto img = render_grid(par, cfg);
            auto f = open_out(out_path, true);
            write_pgm(f, img, px);
            return 0;
        }
        if (*gauge) {
            auto rows = boxdim_sequence(par, n_max);
            if (out_path.empty()) {
                write_cover_csv(std::cout, rows);
            } else {
                auto f = open_out(out_path, false);
                write_cover_csv(f, rows);
            }
            return 0;
        }
        if (*cantor) {
            if (level < 1 || level > 20)
                throw std::invalid_argument("--level must lie in [1,20]");
            std::ostringstream body;
            body << "word,re,im,level\n";
            for (long long mask = 0; mask < (1LL << level); ++mask) {
                Word u;
                for (int j = 0; j < level; ++j)
                    u.push_back((mask >> (level - 1 - j)) & 1 ? 1 : -1);
                body << u.str() << ',' << format_g17(cantor_point(u, par.scales))
                     << ",0," << level << '\n';
            }
            if (out_path.empty()) {
                std::cout << body.str();
            } else {
                auto f = open_out(out_path, false);
                f << body.str();
            }
            if (!boxdim_out.empty()) {
                auto f = open_out(boxdim_out, false);
                write_cover_csv(f, boxdim_sequence(par, n_max));
            }
            if (!scales_out.empty()) {
                auto f = open_out(scales_out, false);
                f << "n,log_t,log_s,log_r\n";
                for (int n = 0; n <= par.scales.max_depth(); ++n)
                    f << n << ',' << format_g17(par.scales.log_t[n]) << ','
                      << format_g17(par.scales.log_s[n]) << ','
                      << format_g17(par.scales.log_r[n]) << '\n';
            }
            return 0;
        }
        if (*pullback)
            return cmd_pullback(par, map_str, xi_str, depth, centers, radii_n, metric_str,
                                seed, threads, out_path);
        if (*classify_cmd) {
            Region rg = classify(absolute_point(parse_complex(point_str)), par);
            JsonWriter j(std::cout);
            j.begin_object();
            j.kv("level", static_cast<long long>(rg.word.size()));
            j.kv("point", point_str);
            j.kv("tag", region_tag_name(rg.tag));
            j.kv("word", rg.word.str());
            j.end_object();
            std::cout << '\n';
            return 0;
        }
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
