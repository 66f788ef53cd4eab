#pragma once

#include <iosfwd>
#include <vector>

#include "qr/qrmap.hpp"

namespace qr {

struct CoverRow {
    int n = 0;
    double neg_log_2sn = 0.0;  // -log(2 s_n)
    double S_direct = 0.0;     // 2^n * h(2 s_n)
    double S_closed = 0.0;     // same sum collapsed in closed form
    double dim_est = 0.0;      // n log 2 / -log(2 s_n)
};

// Gauge-weighted cost of the canonical generation-n cover by 2^n disks of
// radius s_n, computed both term-by-term through the log-space gauge and by
// the closed form; the two must agree to rounding. Requires 2 s_n < 1.
CoverRow cover_sum(const MapParams& p, int n);

// Limit of the cover sums as n grows: (K/(K-1))^(-log 2 / log K).
double limit_value(double K);

std::vector<CoverRow> boxdim_sequence(const MapParams& p, int n_max);

// CSV: header "n,neg_log_2sn,S_direct,S_closed,dim_est", 17-digit floats.
void write_cover_csv(std::ostream& os, const std::vector<CoverRow>& rows);

}  // namespace qr
