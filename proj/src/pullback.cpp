#include "qr/pullback.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "qr/format.hpp"
#include "qr/rng.hpp"

namespace qr {

namespace {

const ScaleTable& table_of(const MapInstance& inst) {
    if (inst.params) return inst.params->scales;
    static const ScaleTable fallback = ScaleTable::build(1.5, 0.0625, 2);
    return fallback;  // never consulted for purely absolute points
}

// Scale-relative identity test. Points anchored at the same address compare
// by offset; same-level points in different disks are always distinct (the
// disks are disjoint by construction); everything else goes through the
// exact log-space distance against the coarser of the two scales.
bool nodes_equal(const Point& a, const Point& b, const ScaleTable& st) {
    if (a.anchor == b.anchor) {
        double scale = std::max({1.0, std::abs(a.offset), std::abs(b.offset)});
        return std::abs(a.offset - b.offset) <= 1e-9 * scale;
    }
    if (a.anchor.size() == b.anchor.size()) return false;
    double ld = log_point_distance(a, b, st);
    std::size_t n = std::min(a.anchor.size(), b.anchor.size());
    double coarse_log_scale;
    if (n == 0) {
        const Point& abs_pt = a.anchor.empty() ? a : b;
        coarse_log_scale = std::log(std::max(1.0, std::abs(abs_pt.offset)));
    } else {
        coarse_log_scale = st.log_t[n];
    }
    return ld <= std::log(1e-9) + coarse_log_scale;
}

struct Keyed {
    TreeNode node;
    Complex abs;
};

std::vector<TreeNode> dedup_level(std::vector<TreeNode> nodes, const ScaleTable& st) {
    std::vector<Keyed> keyed;
    keyed.reserve(nodes.size());
    for (auto& nd : nodes) keyed.push_back({std::move(nd), Complex{}});
    for (auto& k : keyed) k.abs = to_complex(k.node.z, st);

    std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
        if (a.abs.real() != b.abs.real()) return a.abs.real() < b.abs.real();
        if (a.abs.imag() != b.abs.imag()) return a.abs.imag() < b.abs.imag();
        if (!(a.node.z.anchor == b.node.z.anchor)) return a.node.z.anchor < b.node.z.anchor;
        if (a.node.z.offset.real() != b.node.z.offset.real())
            return a.node.z.offset.real() < b.node.z.offset.real();
        return a.node.z.offset.imag() < b.node.z.offset.imag();
    });

    std::vector<TreeNode> out;
    std::vector<double> out_re;
    out.reserve(keyed.size());
    for (auto& k : keyed) {
        double window = 2e-9 * std::max(1.0, std::abs(k.abs.real())) + 1e-300;
        bool merged = false;
        for (std::size_t j = out.size(); j-- > 0;) {
            if (k.abs.real() - out_re[j] > window) break;
            if (nodes_equal(k.node.z, out[j].z, st)) {
                out[j].path_weight += k.node.path_weight;
                merged = true;
                break;
            }
        }
        if (!merged) {
            out.push_back(std::move(k.node));
            out_re.push_back(k.abs.real());
        }
    }
    return out;
}

PullbackTree build_tree_impl(const MapInstance& inst, const Point& xi, int depth,
                             int workers) {
    const ScaleTable& st = table_of(inst);
    PullbackTree t;
    t.levels.push_back({TreeNode{xi, 1, 1, -1}});

    for (int m = 0; m < depth; ++m) {
        const auto& cur = t.levels.back();
        std::vector<std::vector<Preimage>> fibers(cur.size());
        std::atomic<std::size_t> next{0};
        std::mutex err_mu;
        std::string err;

        auto expand = [&] {
            for (;;) {
                std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= cur.size()) return;
                try {
                    fibers[i] = inst.preimage_op(cur[i].z);
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (err.empty())
                        err = "preimage operator failed at level " + std::to_string(m) +
                              ", node " + std::to_string(i) + " = " +
                              format_complex(to_complex(cur[i].z, st)) + ": " + e.what();
                }
            }
        };
        int nw = std::max(1, workers);
        if (nw > static_cast<int>(cur.size())) nw = static_cast<int>(cur.size());
        std::vector<std::thread> pool;
        for (int i = 1; i < nw; ++i) pool.emplace_back(expand);
        expand();
        for (auto& th : pool) th.join();
        if (!err.empty()) throw std::runtime_error(err);

        std::vector<TreeNode> raw;
        for (std::size_t i = 0; i < cur.size(); ++i)
            for (const auto& pr : fibers[i])
                raw.push_back(TreeNode{pr.z, pr.local_index,
                                       cur[i].path_weight * pr.local_index,
                                       static_cast<int>(i)});
        t.levels.push_back(dedup_level(std::move(raw), st));
    }
    return t;
}

}  // namespace

MapInstance make_quadratic_instance(const Complex& c) {
    MapInstance inst;
    inst.name = "quad:c=" + format_complex(c);
    inst.degree = 2;
    inst.dilatation = 1.0;
    inst.critical_values = {{c, 2}};
    inst.eval = [c](const Point& p) {
        if (!p.anchor.empty())
            throw std::invalid_argument("analytic instance expects absolute points");
        return absolute_point(p.offset * p.offset + c);
    };
    inst.preimage_op = [c](const Point& p) {
        if (!p.anchor.empty())
            throw std::invalid_argument("analytic instance expects absolute points");
        Complex root = std::sqrt(p.offset - c);
        std::vector<Preimage> out;
        if (std::abs(root) <= 5e-10) {
            out.push_back({absolute_point(root), 2});
        } else {
            out.push_back({absolute_point(root), 1});
            out.push_back({absolute_point(-root), 1});
        }
        return out;
    };
    return inst;
}

MapInstance make_piecewise_instance(const MapParams& p) {
    auto sp = std::make_shared<const MapParams>(p);
    MapInstance inst;
    inst.name = "piecewise";
    inst.degree = 2;
    inst.dilatation = p.K;
    inst.params = sp;
    inst.critical_values = {{Complex(-sp->lambda, 0.0), 2}};
    inst.eval = [sp](const Point& z) { return evaluate(z, *sp); };
    inst.preimage_op = [sp](const Point& w) { return preimages(w, *sp); };
    return inst;
}

long long exceptional_point_check(const MapInstance& inst, const Point& xi) {
    PullbackTree t = build_tree_impl(inst, xi, 6, 1);
    return static_cast<long long>(t.levels.back().size());
}

PullbackTree build_tree(const MapInstance& inst, const Point& xi, int depth,
                        int workers) {
    if (depth < 0) throw std::invalid_argument("tree depth must be >= 0");
    if (inst.dilatation > 1.0) {
        long long card = exceptional_point_check(inst, xi);
        if (card < 3)
            throw std::invalid_argument(
                "base point failed the backward-orbit certificate: 6th fiber has " +
                std::to_string(card) + " distinct points, need >= 3");
    }
    return build_tree_impl(inst, xi, depth, workers);
}

LevelCounts level_count_check(const PullbackTree& t, int degree) {
    if (t.depth() < 1) throw std::invalid_argument("tree depth must be >= 1");
    LevelCounts lc;
    long long expect = 1;
    for (const auto& lvl : t.levels) {
        lc.counts.push_back(static_cast<long long>(lvl.size()));
        long long ws = 0;
        for (const auto& nd : lvl) ws += nd.path_weight;
        lc.weight_sums.push_back(ws);
        if (ws != expect) lc.weights_ok = false;
        expect *= degree;
    }

    bool first = true;
    for (std::size_t m = 0; m + 1 < lc.counts.size(); ++m) {
        long long margin = (lc.counts[m + 1] - 2) - degree * (lc.counts[m] - 2);
        if (first || margin < lc.growth_margin) lc.growth_margin = margin;
        first = false;
        if (margin < 0) lc.growth_ok = false;
    }

    first = true;
    for (std::size_t m = 6; m < lc.counts.size(); ++m) {
        long long bound = 1;
        for (std::size_t j = 6; j < m; ++j) bound *= degree;
        long long margin = lc.counts[m] - bound;
        if (first || margin < lc.lower_margin) lc.lower_margin = margin;
        first = false;
        if (margin < 0) lc.lower_ok = false;
    }
    return lc;
}

double max_forward_residual(const PullbackTree& t, const MapInstance& inst) {
    const ScaleTable& st = table_of(inst);
    double worst = 0.0;
    for (std::size_t k = 1; k < t.levels.size(); ++k) {
        for (const auto& nd : t.levels[k]) {
            const Point& parent = t.levels[k - 1][nd.parent].z;
            Point img = inst.eval(nd.z);
            double ld = log_point_distance(img, parent, st);
            double scale = std::max(1.0, std::abs(to_complex(parent, st)));
            double resid = std::exp(ld) / scale;
            worst = std::max(worst, resid);
        }
    }
    return worst;
}

MassReport mass_distribution(const PullbackTree& t, const MapInstance& inst,
                             const std::function<double(double)>& gauge_from_log,
                             const std::vector<double>& neg_log_radii,
                             int centers, MassMetric metric, std::uint64_t seed) {
    const ScaleTable& st = table_of(inst);
    const auto& support = t.levels.back();
    std::size_t n = support.size();
    if (n < 2) throw std::invalid_argument("mass distribution needs a support of >= 2 points");
    if (centers < 1) throw std::invalid_argument("need at least one sampled center");
    if (neg_log_radii.empty()) throw std::invalid_argument("need at least one radius");
    for (double nl : neg_log_radii)
        if (!(nl > 0.0))
            throw std::domain_error("radii must lie in (0,1): got -log r = " + format_g17(nl));

    MassReport rep;
    if (centers >= static_cast<int>(n)) {
        rep.center_indices.resize(n);
        for (std::size_t i = 0; i < n; ++i) rep.center_indices[i] = static_cast<int>(i);
    } else {
        Rng rng(seed);
        std::vector<int> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<int>(i);
        for (int i = 0; i < centers; ++i) {
            std::size_t j = i + rng.index(n - i);
            std::swap(idx[i], idx[j]);
        }
        rep.center_indices.assign(idx.begin(), idx.begin() + centers);
        std::sort(rep.center_indices.begin(), rep.center_indices.end());
    }

    std::vector<double> log_dist(n);
    for (std::size_t ci = 0; ci < rep.center_indices.size(); ++ci) {
        const Point& x = support[rep.center_indices[ci]].z;
        double hx = std::hypot(1.0, std::abs(to_complex(x, st)));
        for (std::size_t j = 0; j < n; ++j) {
            double ld = log_point_distance(x, support[j].z, st);
            if (metric == MassMetric::Chordal) {
                double hy = std::hypot(1.0, std::abs(to_complex(support[j].z, st)));
                ld += std::log(2.0) - std::log(hx) - std::log(hy);
            }
            log_dist[j] = ld;
        }
        for (double nl : neg_log_radii) {
            std::size_t count = 0;
            for (std::size_t j = 0; j < n; ++j)
                if (log_dist[j] <= -nl) ++count;
            MassRow row;
            row.center = static_cast<int>(ci);
            row.neg_log_r = nl;
            row.mu = static_cast<double>(count) / static_cast<double>(n);
            row.gauge = gauge_from_log(nl);
            row.ratio = row.mu / row.gauge;
            rep.C_est = std::max(rep.C_est, row.ratio);
            rep.rows.push_back(row);
        }
    }
    return rep;
}

MassReport mass_distribution(const PullbackTree& t, const MapInstance& inst,
                             const Gauge& g, const std::vector<double>& neg_log_radii,
                             int centers, MassMetric metric, std::uint64_t seed) {
    return mass_distribution(
        t, inst, [&g](double nl) { return gauge_eval_from_log(g, nl); },
        neg_log_radii, centers, metric, seed);
}

int expected_components(const MapInstance& inst, const Complex& center, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("disk radius must be positive");
    int s = 0;
    for (const auto& [value, index] : inst.critical_values)
        if (std::abs(value - center) < radius) s += index - 1;
    return inst.degree - s;
}

void write_report_json(std::ostream& os, const PullbackReport& rep) {
    JsonWriter j(os);
    j.begin_object();
    j.kv("C_est", rep.C_est);
    j.begin_array("checks");
    for (const auto& c : rep.checks) {
        j.begin_object_in_array();
        j.kv("name", c.name);
        j.kv("pass", c.pass);
        j.kv("value", c.value);
        j.end_object();
    }
    j.end_array();
    j.begin_array("counts");
    for (long long c : rep.counts) j.value(c);
    j.end_array();
    j.kv("depth", rep.depth);
    j.kv("instance", rep.instance);
    j.begin_array("table");
    for (const auto& r : rep.table) {
        j.begin_object_in_array();
        j.kv("center", r.center);
        j.kv("gauge", r.gauge);
        j.kv("mu", r.mu);
        j.kv("neg_log_r", r.neg_log_r);
        j.kv("ratio", r.ratio);
        j.end_object();
    }
    j.end_array();
    j.kv("xi", rep.xi);
    j.end_object();
    os << '\n';
}

}  // namespace qr
