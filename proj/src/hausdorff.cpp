#include "qr/hausdorff.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "qr/format.hpp"
#include "qr/geometry.hpp"

namespace qr {

CoverRow cover_sum(const MapParams& p, int n) {
    const ScaleTable& st = p.scales;
    if (n < 1 || n > st.max_depth())
        throw std::invalid_argument("cover level out of range: " + std::to_string(n));
    double neg_log = -(std::log(2.0) + st.log_s[n]);
    if (!(neg_log > 0.0))
        throw std::domain_error("cover disks must have radius < 1/2 (2 s_n >= 1 at n = " +
                                std::to_string(n) + ")");

    Gauge g(2, p.K);
    CoverRow row;
    row.n = n;
    row.neg_log_2sn = neg_log;
    // 2^n identical terms; ldexp keeps the power of two exact.
    row.S_direct = std::ldexp(gauge_eval_from_log(g, neg_log), n);

    // Collapse 2^n * X^(-beta) to ((K^-n) X)^(-beta) and expand X = -log(2 s_n)
    // through the defining recurrences; only the n-independent pieces remain.
    double inv_K_pow = 1.0 / st.K_pow[n];
    double inner = inv_K_pow * (-(std::log(2.0) + st.log_t0) - n * st.log_alpha) +
                   (p.K - inv_K_pow) / (p.K - 1.0);
    row.S_closed = std::pow(inner, g.exponent);

    row.dim_est = n * std::log(2.0) / neg_log;
    return row;
}

double limit_value(double K) {
    if (!(K > 1.0) || !(K < 2.0))
        throw std::invalid_argument("K must lie in (1,2), got " + format_g17(K));
    double beta = std::log(2.0) / std::log(K);
    return std::pow(K / (K - 1.0), -beta);
}

std::vector<CoverRow> boxdim_sequence(const MapParams& p, int n_max) {
    if (n_max < 2) throw std::invalid_argument("need n_max >= 2");
    std::vector<CoverRow> rows;
    rows.reserve(n_max);
    for (int n = 1; n <= n_max; ++n) rows.push_back(cover_sum(p, n));
    return rows;
}

void write_cover_csv(std::ostream& os, const std::vector<CoverRow>& rows) {
    os << "n,neg_log_2sn,S_direct,S_closed,dim_est\n";
    for (const auto& r : rows)
        os << r.n << ',' << format_g17(r.neg_log_2sn) << ',' << format_g17(r.S_direct)
           << ',' << format_g17(r.S_closed) << ',' << format_g17(r.dim_est) << '\n';
}

}  // namespace qr
