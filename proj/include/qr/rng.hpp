#pragma once

#include <cstdint>
#include <random>

#include "qr/geometry.hpp"

namespace qr {

// Seeded generator with explicit uniform mappings. std::uniform_real_distribution
// is not pinned down by the standard, so sampling goes through the raw 64-bit
// stream to keep results identical across compilers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform in [0,1) with 53 random bits.
    double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * unit(); }

    int sign() { return (gen_() & 1) ? 1 : -1; }

    std::uint64_t index(std::uint64_t n) {
        // Rejection sampling, no modulo bias.
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do { x = gen_(); } while (x >= limit);
        return x % n;
    }

    Complex on_circle(double radius) {
        double phi = uniform(0.0, 6.283185307179586476925286766559);
        return Complex(radius * std::cos(phi), radius * std::sin(phi));
    }

    Complex in_disk(const Complex& center, double radius) {
        // Area-uniform: r = R*sqrt(u).
        double r = radius * std::sqrt(unit());
        return center + on_circle(r);
    }

    Complex in_annulus(const Complex& center, double r_inner, double r_outer) {
        double u = unit();
        double r = std::sqrt(r_inner * r_inner + u * (r_outer * r_outer - r_inner * r_inner));
        return center + on_circle(r);
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace qr
