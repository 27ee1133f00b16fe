#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "lplasma/types.hpp"

namespace lplasma {

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton iteration on P_n).
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(std::size_t n) {
    std::vector<double> x(n), w(n);
    const std::size_t m = (n + 1) / 2;
    for (std::size_t i = 0; i < m; ++i) {
        double z = std::cos(kPi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (std::size_t j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / static_cast<double>(j);
            }
            pp = static_cast<double>(n) * (z * p1 - p2) / (z * z - 1.0);
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
    return {x, w};
}

/// Average of f over the disk B(center, radius): Gauss-Legendre in r^2 times
/// the trapezoid rule in angle (exact for trigonometric polynomials of degree < angular).
template <class F>
double disk_average(F&& f, Point2 center, double radius, std::size_t radial = 12, std::size_t angular = 32) {
    const auto [x, w] = gauss_legendre(radial);
    double sum = 0.0;
    for (std::size_t i = 0; i < radial; ++i) {
        const double r = radius * std::sqrt(0.5 * (x[i] + 1.0));
        double ring = 0.0;
        for (std::size_t k = 0; k < angular; ++k) {
            const double t = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(angular);
            ring += f(Point2{center.x + r * std::cos(t), center.y + r * std::sin(t)});
        }
        sum += 0.5 * w[i] * ring / static_cast<double>(angular);
    }
    return sum;
}

} // namespace lplasma
