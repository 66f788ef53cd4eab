#pragma once

#include <complex>

namespace qr {

using Complex = std::complex<double>;

// Distance on the Riemann sphere. Non-finite inputs are treated as the point
// at infinity, so escaping orbits can still be compared.
double chordal_distance(const Complex& z, const Complex& w);
double chordal_to_infinity(const Complex& z);

// Scaling gauge t -> (log 1/t)^(-log d / log K). The exponent is negative,
// so the gauge vanishes as t -> 0 slower than any power of t.
struct Gauge {
    int degree;
    double dilatation;
    double exponent;  // -log(degree)/log(dilatation)

    Gauge(int degree, double dilatation);
};

// Requires 0 < t < 1.
double gauge_eval(const Gauge& g, double t);

// Same gauge evaluated from -log t directly; usable long after t itself has
// underflowed. Requires neg_log_t > 0.
double gauge_eval_from_log(const Gauge& g, double neg_log_t);

}  // namespace qr
