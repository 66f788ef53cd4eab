#include "qr/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qr {

namespace {

bool is_finite(const Complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

}  // namespace

double chordal_to_infinity(const Complex& z) {
    if (!is_finite(z)) return 0.0;
    // 2 / sqrt(1+|z|^2); hypot avoids overflow in the square.
    return 2.0 / std::hypot(1.0, std::abs(z));
}

double chordal_distance(const Complex& z, const Complex& w) {
    bool zf = is_finite(z), wf = is_finite(w);
    if (!zf && !wf) return 0.0;
    if (!zf) return chordal_to_infinity(w);
    if (!wf) return chordal_to_infinity(z);
    double a = std::hypot(1.0, std::abs(z));
    double b = std::hypot(1.0, std::abs(w));
    // Divide twice instead of forming a*b, which can overflow when both
    // points are near the edge of the representable range.
    return 2.0 * (std::abs(z - w) / a) / b;
}

Gauge::Gauge(int degree_, double dilatation_)
    : degree(degree_), dilatation(dilatation_) {
    if (degree < 2)
        throw std::invalid_argument("gauge degree must be >= 2, got " + std::to_string(degree));
    if (!(dilatation > 1.0) || !std::isfinite(dilatation))
        throw std::invalid_argument("gauge dilatation must be > 1, got " + std::to_string(dilatation));
    exponent = -std::log(static_cast<double>(degree)) / std::log(dilatation);
}

double gauge_eval(const Gauge& g, double t) {
    if (!(t > 0.0) || !(t < 1.0))
        throw std::domain_error("gauge argument must lie in (0,1), got " + std::to_string(t));
    return gauge_eval_from_log(g, -std::log(t));
}

double gauge_eval_from_log(const Gauge& g, double neg_log_t) {
    if (!(neg_log_t > 0.0))
        throw std::domain_error("gauge log argument must be positive, got " + std::to_string(neg_log_t));
    return std::pow(neg_log_t, g.exponent);
}

}  // namespace qr
