#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "qr/hausdorff.hpp"

using qr::CoverRow;
using qr::MapParams;

namespace {

const MapParams& reference_params() {
    static MapParams p = qr::make_map_params(1.5, 0.05);
    return p;
}

}  // namespace

TEST_CASE("limit of the cover sums") {
    CHECK(qr::limit_value(1.5) == doctest::Approx(0.15288181420019564).epsilon(1e-15));
    CHECK(qr::limit_value(4.0 / 3.0) ==
          doctest::Approx(0.035431057123984366).epsilon(1e-14));
    CHECK(qr::limit_value(1.2) == doctest::Approx(0.0011006190196937935).epsilon(1e-14));
    CHECK(qr::limit_value(1.8) == doctest::Approx(0.38431639482002395).epsilon(1e-14));
    // increasing in K: stronger stretching leaves a thicker residue
    CHECK(qr::limit_value(1.2) < qr::limit_value(1.5));
    CHECK(qr::limit_value(1.5) < qr::limit_value(1.8));
    CHECK_THROWS_AS(qr::limit_value(1.0), std::invalid_argument);
    CHECK_THROWS_AS(qr::limit_value(2.0), std::invalid_argument);
}

TEST_CASE("cover sums at the reference parameters") {
    const MapParams& p = reference_params();
    CoverRow r12 = qr::cover_sum(p, 12);
    CHECK(r12.neg_log_2sn == doctest::Approx(436.74389174628174).epsilon(1e-13));
    CHECK(r12.S_direct == doctest::Approx(0.12556319379271555).epsilon(1e-12));
    CHECK(r12.S_closed == doctest::Approx(0.12556319379271555).epsilon(1e-12));
    CHECK(r12.dim_est == doctest::Approx(0.019044951340845302).epsilon(1e-12));
    CoverRow r40 = qr::cover_sum(p, 40);
    CHECK(r40.S_closed == doctest::Approx(0.15288047323697966).epsilon(1e-12));
    CHECK(std::abs(r40.S_closed - qr::limit_value(1.5)) <=
          1e-3 * qr::limit_value(1.5));
    CoverRow r24 = qr::cover_sum(p, 24);
    CHECK(r24.dim_est == doctest::Approx(0.00032874970073302472).epsilon(1e-12));
    CHECK(r24.dim_est < r12.dim_est);
}

TEST_CASE("direct and closed evaluations agree after the scales underflow") {
    for (double K : {1.2, 1.5, 1.8}) {
        MapParams p = qr::make_map_params(K);
        for (int n = 1; n <= 40; ++n) {
            CoverRow row = qr::cover_sum(p, n);
            CHECK(std::abs(row.S_direct - row.S_closed) <= 1e-10 * row.S_closed);
            CHECK(row.neg_log_2sn > 0.0);
        }
    }
}

TEST_CASE("cover sum argument validation") {
    const MapParams& p = reference_params();
    CHECK_THROWS_AS(qr::cover_sum(p, 0), std::invalid_argument);
    CHECK_THROWS_AS(qr::cover_sum(p, -3), std::invalid_argument);
    CHECK_THROWS_AS(qr::cover_sum(p, p.scales.max_depth() + 1), std::invalid_argument);
}

TEST_CASE("box dimension sequence decreases toward zero") {
    const MapParams& p = reference_params();
    auto rows = qr::boxdim_sequence(p, 24);
    REQUIRE(rows.size() == 24);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].n == static_cast<int>(i) + 1);
        if (i > 0) CHECK(rows[i].dim_est < rows[i - 1].dim_est);
    }
    CHECK(rows.back().dim_est < 0.001);
    CHECK_THROWS_AS(qr::boxdim_sequence(p, 1), std::invalid_argument);
}

TEST_CASE("csv emission") {
    const MapParams& p = reference_params();
    auto rows = qr::boxdim_sequence(p, 4);
    std::ostringstream os;
    qr::write_cover_csv(os, rows);
    std::string s = os.str();
    CHECK(s.rfind("n,neg_log_2sn,S_direct,S_closed,dim_est\n", 0) == 0);
    int lines = 0;
    for (char c : s)
        if (c == '\n') ++lines;
    CHECK(lines == 5);
    CHECK(s.find("\n1,") != std::string::npos);
    CHECK(s.find("\n4,") != std::string::npos);
}
