#include <algorithm>
#include <cmath>
#include <complex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "qr/pullback.hpp"

using qr::Complex;
using qr::MapInstance;
using qr::MapParams;
using qr::Point;
using qr::PullbackTree;
using qr::Word;

namespace {

const MapParams& reference_params() {
    static MapParams p = qr::make_map_params(1.5, 0.05);
    return p;
}

}  // namespace

TEST_CASE("quadratic instance preimages") {
    MapInstance inst = qr::make_quadratic_instance({0, 0});
    CHECK(inst.degree == 2);
    CHECK(inst.dilatation == 1.0);
    auto fiber = inst.preimage_op(qr::absolute_point({-1, 0}));
    REQUIRE(fiber.size() == 2);  // +-i
    for (const auto& pre : fiber) {
        CHECK(std::abs(pre.z.offset.real()) <= 1e-12);
        CHECK(std::abs(pre.z.offset.imag()) == doctest::Approx(1.0));
    }
    // critical value has a single index-2 preimage
    auto crit = inst.preimage_op(qr::absolute_point({0, 0}));
    REQUIRE(crit.size() == 1);
    CHECK(crit[0].local_index == 2);
}

TEST_CASE("roots of unity from the backward orbit of one") {
    MapInstance inst = qr::make_quadratic_instance({0, 0});
    PullbackTree t = qr::build_tree(inst, qr::absolute_point({1, 0}), 8);
    REQUIRE(t.depth() == 8);
    REQUIRE(t.levels[8].size() == 256);
    for (const auto& node : t.levels[8]) {
        Complex z = node.z.offset;
        CHECK(std::abs(std::abs(z) - 1.0) <= 1e-12);
        Complex pw{1, 0};
        for (int i = 0; i < 256; ++i) pw *= z;
        CHECK(std::abs(pw - Complex{1, 0}) <= 1e-9);
    }
    qr::LevelCounts lc = qr::level_count_check(t, 2);
    CHECK(lc.growth_ok);
    CHECK(lc.lower_ok);
    CHECK(lc.weights_ok);
    for (int m = 0; m <= 8; ++m) CHECK(lc.counts[m] == (1LL << m));
    CHECK(qr::max_forward_residual(t, inst) <= 1e-12);
}

TEST_CASE("collisions merge but keep their multiplicity") {
    // z^2 - 2 pulled back from 2 collapses heavily (the interval case), so
    // the distinct counts lag far behind 2^m while weights stay exact
    MapInstance inst = qr::make_quadratic_instance({-2, 0});
    PullbackTree t = qr::build_tree(inst, qr::absolute_point({2, 0}), 8);
    qr::LevelCounts lc = qr::level_count_check(t, 2);
    CHECK(lc.weights_ok);
    CHECK(lc.growth_ok);
    CHECK(lc.lower_ok);
    CHECK(lc.counts[1] == 2);
    CHECK(lc.counts[2] == 3);  // {2, -2, 0}
    CHECK(lc.counts[8] < 256);
    for (int m = 0; m <= 8; ++m) CHECK(lc.weight_sums[m] == (1LL << m));
    // every node is real and in [-2, 2]
    for (const auto& lvl : t.levels)
        for (const auto& node : lvl) {
            CHECK(std::abs(node.z.offset.imag()) <= 1e-9);
            CHECK(std::abs(node.z.offset.real()) <= 2.0 + 1e-9);
        }
}

TEST_CASE("exceptional point certificate") {
    MapInstance quad = qr::make_quadratic_instance({0, 0});
    CHECK(qr::exceptional_point_check(quad, qr::absolute_point({0, 0})) == 1);
    CHECK(qr::exceptional_point_check(quad, qr::absolute_point({1, 0})) == 64);
    MapInstance pw = qr::make_piecewise_instance(reference_params());
    CHECK(qr::exceptional_point_check(pw, qr::absolute_point({-1, 0})) >= 3);
    CHECK(qr::exceptional_point_check(
              pw, qr::absolute_point({-reference_params().lambda, 0})) >= 3);
}

TEST_CASE("the piecewise instance refuses an exceptional-looking base point only") {
    // dilatation > 1 gates on the certificate; the analytic oracle does not
    MapInstance quad = qr::make_quadratic_instance({0, 0});
    PullbackTree t = qr::build_tree(quad, qr::absolute_point({0, 0}), 3);
    for (const auto& lvl : t.levels) CHECK(lvl.size() == 1);
    CHECK(t.levels[3][0].path_weight == 8);
    MapInstance pw = qr::make_piecewise_instance(reference_params());
    CHECK_NOTHROW(qr::build_tree(pw, qr::absolute_point({-1, 0}), 2));
}

TEST_CASE("pullback of the piecewise map from minus one walks the centers") {
    const MapParams& p = reference_params();
    MapInstance pw = qr::make_piecewise_instance(p);
    PullbackTree t = qr::build_tree(pw, qr::absolute_point({-1, 0}), 5, 2);
    qr::LevelCounts lc = qr::level_count_check(t, 2);
    CHECK(lc.weights_ok);
    CHECK(lc.growth_ok);
    for (int m = 0; m <= 5; ++m) {
        CHECK(lc.counts[m] == (1LL << m));
        CHECK(lc.weight_sums[m] == (1LL << m));
    }
    // level 1 is the pair of depth-2 centers from the worked example
    REQUIRE(t.levels[1].size() == 2);
    std::set<std::string> words;
    for (const auto& node : t.levels[1]) {
        CHECK(std::abs(node.z.offset) <= 1e-12);
        words.insert(node.z.anchor.str());
    }
    CHECK(words == std::set<std::string>{"+-", "-+"});
    CHECK(qr::max_forward_residual(t, pw) <= 1e-8);
    // deepest level: 32 distinct centers at word depth 6, all mapping down
    // to (-) under five applications of tau
    for (const auto& node : t.levels[5]) {
        Word u = node.z.anchor;
        REQUIRE(u.size() == 6);
        for (int i = 0; i < 5; ++i) u = qr::shift_tau(u);
        CHECK(u == Word::parse("-"));
    }
}

TEST_CASE("tree construction does not depend on the worker count") {
    MapInstance pw = qr::make_piecewise_instance(reference_params());
    PullbackTree a = qr::build_tree(pw, qr::absolute_point({0.5, 0.25}), 6, 1);
    PullbackTree b = qr::build_tree(pw, qr::absolute_point({0.5, 0.25}), 6, 4);
    REQUIRE(a.levels.size() == b.levels.size());
    for (std::size_t m = 0; m < a.levels.size(); ++m) {
        REQUIRE(a.levels[m].size() == b.levels[m].size());
        for (std::size_t i = 0; i < a.levels[m].size(); ++i) {
            CHECK(a.levels[m][i].z.anchor == b.levels[m][i].z.anchor);
            CHECK(a.levels[m][i].z.offset == b.levels[m][i].z.offset);
            CHECK(a.levels[m][i].path_weight == b.levels[m][i].path_weight);
        }
    }
}

TEST_CASE("build_tree rejects nonsense") {
    MapInstance quad = qr::make_quadratic_instance({0, 0});
    CHECK_THROWS_AS(qr::build_tree(quad, qr::absolute_point({1, 0}), -1),
                    std::invalid_argument);
    MapInstance pw = qr::make_piecewise_instance(reference_params());
    // an anchored base point is fine for the piecewise map
    CHECK_NOTHROW(qr::build_tree(pw, qr::anchored_point(Word::parse("+-"), {0, 0}), 2));
}

TEST_CASE("uniform mass on the roots of unity scales like arc length") {
    MapInstance inst = qr::make_quadratic_instance({0, 0});
    PullbackTree t = qr::build_tree(inst, qr::absolute_point({1, 0}), 10);
    std::vector<double> radii{-std::log(0.3), -std::log(0.1)};
    auto gauge_identity = [](double nl) { return std::exp(-nl); };
    qr::MassReport rep = qr::mass_distribution(t, inst, gauge_identity, radii, 8,
                                               qr::MassMetric::Euclidean, 7u);
    REQUIRE(rep.rows.size() == 16);
    for (const auto& row : rep.rows) {
        CHECK(row.mu > 0.0);
        CHECK(row.mu <= 1.0);
        // fraction within distance r of a root ~ 2 asin(r/2)/pi, so mu/r
        // hovers around 1/pi
        CHECK(row.ratio > 0.25);
        CHECK(row.ratio < 0.40);
    }
    CHECK(rep.C_est == doctest::Approx(0.3195).epsilon(0.05));
    // same seed, same report
    qr::MassReport rep2 = qr::mass_distribution(t, inst, gauge_identity, radii, 8,
                                                qr::MassMetric::Euclidean, 7u);
    CHECK(rep2.C_est == rep.C_est);
    REQUIRE(rep2.center_indices == rep.center_indices);
}

TEST_CASE("mass is monotone in the radius at every center") {
    const MapParams& p = reference_params();
    MapInstance inst = qr::make_piecewise_instance(p);
    PullbackTree t = qr::build_tree(inst, qr::absolute_point({-1, 0}), 8, 2);
    std::vector<double> radii;
    for (int j = 6; j >= 1; --j) radii.push_back(-(std::log(2.0) + p.scales.log_s[j]));
    qr::Gauge g(2, 1.5);
    qr::MassReport rep = qr::mass_distribution(t, inst, g, radii, 16,
                                               qr::MassMetric::Euclidean, 11u);
    REQUIRE(rep.rows.size() == 16 * radii.size());
    for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i) {
        const auto& a = rep.rows[i];
        const auto& b = rep.rows[i + 1];
        if (a.center != b.center) continue;
        // radii were passed largest last, so mass may only grow along a row group
        REQUIRE(a.neg_log_r > b.neg_log_r);
        CHECK(a.mu <= b.mu);
    }
}

TEST_CASE("levels hold no mergeable pair") {
    // dedup is idempotent: every surviving pair sits farther apart than the
    // merge tolerance, in the scale-relative sense used by the tree builder
    const MapParams& p = reference_params();
    MapInstance inst = qr::make_piecewise_instance(p);
    PullbackTree t = qr::build_tree(inst, qr::absolute_point({-1, 0}), 6, 2);
    for (const auto& lvl : t.levels) {
        for (std::size_t i = 0; i < lvl.size(); ++i) {
            for (std::size_t j = i + 1; j < lvl.size(); ++j) {
                const Point& a = lvl[i].z;
                const Point& b = lvl[j].z;
                if (a.anchor == b.anchor) {
                    // same disk (or both absolute): offsets must clear the
                    // relative merge tolerance on the local scale
                    double scale = std::max({1.0, std::abs(a.offset), std::abs(b.offset)});
                    CHECK(std::abs(a.offset - b.offset) > 1e-9 * scale);
                }
                // different anchors of equal depth label disjoint disks and
                // are distinct regardless of the absolute gap
            }
        }
    }
    MapInstance quad = qr::make_quadratic_instance({0, 0});
    PullbackTree rt = qr::build_tree(quad, qr::absolute_point({1, 0}), 8);
    const auto& roots = rt.levels.back();
    for (std::size_t i = 0; i < roots.size(); ++i)
        for (std::size_t j = i + 1; j < roots.size(); ++j)
            CHECK(std::abs(roots[i].z.offset - roots[j].z.offset) > 1e-9);
}

TEST_CASE("mass distribution input validation") {
    MapInstance inst = qr::make_quadratic_instance({0, 0});
    PullbackTree t = qr::build_tree(inst, qr::absolute_point({1, 0}), 4);
    auto g = [](double nl) { return std::exp(-nl); };
    CHECK_THROWS_AS(qr::mass_distribution(t, inst, g, {0.0}, 4,
                                          qr::MassMetric::Euclidean, 1u),
                    std::domain_error);
    CHECK_THROWS_AS(qr::mass_distribution(t, inst, g, {-1.0}, 4,
                                          qr::MassMetric::Euclidean, 1u),
                    std::domain_error);
    PullbackTree shallow = qr::build_tree(inst, qr::absolute_point({1, 0}), 0);
    CHECK_THROWS_AS(qr::mass_distribution(shallow, inst, g, {1.0}, 4,
                                          qr::MassMetric::Euclidean, 1u),
                    std::invalid_argument);
}

TEST_CASE("chordal metric variant stays finite") {
    MapInstance inst = qr::make_quadratic_instance({0, 0});
    PullbackTree t = qr::build_tree(inst, qr::absolute_point({1, 0}), 8);
    qr::Gauge g(2, 1.5);
    qr::MassReport rep = qr::mass_distribution(t, inst, g, {2.0, 5.0}, 4,
                                               qr::MassMetric::Chordal, 11u);
    for (const auto& row : rep.rows) {
        CHECK(std::isfinite(row.ratio));
        CHECK(row.gauge > 0.0);
    }
}

TEST_CASE("component count of disk preimages") {
    MapInstance quad = qr::make_quadratic_instance({0.25, 0});
    CHECK(qr::expected_components(quad, {0.25, 0}, 0.1) == 1);
    CHECK(qr::expected_components(quad, {3, 0}, 0.5) == 2);
    MapInstance pw = qr::make_piecewise_instance(reference_params());
    CHECK(qr::expected_components(pw, {-reference_params().lambda, 0}, 1.0) == 1);
    CHECK(qr::expected_components(pw, {5, 5}, 2.0) == 2);
    CHECK_THROWS_AS(qr::expected_components(pw, {0, 0}, 0.0), std::invalid_argument);
}

TEST_CASE("report serialization is stable and parseable") {
    qr::PullbackReport rep;
    rep.instance = "quad:c=0+0i";
    rep.xi = "1+0i";
    rep.depth = 2;
    rep.counts = {1, 2, 4};
    rep.checks.push_back({"weights", true, 4.0});
    rep.C_est = 0.5;
    rep.table.push_back({0, 2.0, 0.25, 0.1, 2.5});
    std::ostringstream a, b;
    qr::write_report_json(a, rep);
    qr::write_report_json(b, rep);
    CHECK(a.str() == b.str());
    CHECK(a.str().back() == '\n');
    auto j = nlohmann::json::parse(a.str());
    CHECK(j["C_est"] == 0.5);
    CHECK(j["depth"] == 2);
    CHECK(j["instance"] == "quad:c=0+0i");
    CHECK(j["counts"] == nlohmann::json({1, 2, 4}));
    CHECK(j["checks"][0]["name"] == "weights");
    CHECK(j["checks"][0]["pass"] == true);
    CHECK(j["table"][0]["ratio"] == 2.5);
    CHECK(j["xi"] == "1+0i");
    // keys arrive sorted so byte order is deterministic
    std::string s = a.str();
    CHECK(s.find("\"C_est\"") < s.find("\"checks\""));
    CHECK(s.find("\"checks\"") < s.find("\"counts\""));
    CHECK(s.find("\"depth\"") < s.find("\"instance\""));
    CHECK(s.find("\"table\"") < s.find("\"xi\""));
}
