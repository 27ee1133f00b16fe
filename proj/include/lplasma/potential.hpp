#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lplasma/types.hpp"

namespace lplasma {

class Potential;

namespace potential_kind {

struct Zero {};

/// V(x) = |x|^s.
struct RadialPower {
    double s = 2.0;
};

/// V(x, y) = a x^2 + b x y + c y^2.
struct Quadratic {
    double a = 1.0;
    double b = 0.0;
    double c = 1.0;
};

/// Node values on a uniform grid, bilinearly interpolated. Outside the grid the
/// value of the nearest boundary point is used (constant extension).
struct Grid {
    double x0 = 0.0;
    double y0 = 0.0;
    double h = 1.0;
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::vector<double> values; // row-major, values[j * nx + i] at (x0 + i h, y0 + j h)
};

struct Truncated {
    std::shared_ptr<const Potential> inner;
    double cap = 0.0;
};

} // namespace potential_kind

/// One-body potential (confining well V or perturbation U). Immutable value type.
class Potential {
public:
    using Kind = std::variant<potential_kind::Zero, potential_kind::RadialPower, potential_kind::Quadratic,
                              potential_kind::Grid, potential_kind::Truncated>;

    Potential() = default;

    static Potential zero() { return Potential(potential_kind::Zero{}); }

    static Potential radial_power(double s) {
        if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("radial_power: exponent must be positive");
        return Potential(potential_kind::RadialPower{s});
    }

    static Potential quadratic(double a = 1.0, double b = 0.0, double c = 1.0) {
        if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c))
            throw InvalidArgument("quadratic: coefficients must be finite");
        return Potential(potential_kind::Quadratic{a, b, c});
    }

    static Potential grid(double x0, double y0, double h, std::size_t nx, std::size_t ny,
                          std::vector<double> values) {
        if (nx < 2 || ny < 2) throw InvalidArgument("grid potential needs at least 2x2 nodes");
        if (!(h > 0.0)) throw InvalidArgument("grid potential spacing must be positive");
        if (values.size() != nx * ny) throw InvalidArgument("grid potential: values size must be nx*ny");
        for (double v : values)
            if (!std::isfinite(v)) throw InvalidArgument("grid potential: non-finite node value");
        return Potential(potential_kind::Grid{x0, y0, h, nx, ny, std::move(values)});
    }

    static Potential truncated(Potential inner, double cap) {
        if (!std::isfinite(cap)) throw InvalidArgument("truncated potential: cap must be finite");
        return Potential(potential_kind::Truncated{std::make_shared<const Potential>(std::move(inner)), cap});
    }

    [[nodiscard]] const Kind& kind() const { return kind_; }

    [[nodiscard]] bool is_zero() const { return std::holds_alternative<potential_kind::Zero>(kind_); }

    [[nodiscard]] double value(Point2 p) const {
        using namespace potential_kind;
        return std::visit(
            [&](const auto& k) -> double {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, Zero>) {
                    return 0.0;
                } else if constexpr (std::is_same_v<T, RadialPower>) {
                    const double r2 = p.norm2();
                    if (r2 == 0.0) return 0.0;
                    if (k.s == 2.0) return r2;
                    return std::pow(r2, 0.5 * k.s);
                } else if constexpr (std::is_same_v<T, Quadratic>) {
                    return k.a * p.x * p.x + k.b * p.x * p.y + k.c * p.y * p.y;
                } else if constexpr (std::is_same_v<T, Grid>) {
                    return grid_eval(k, p).value;
                } else {
                    return std::min(k.inner->value(p), k.cap);
                }
            },
            kind_);
    }

    [[nodiscard]] Point2 gradient(Point2 p) const {
        using namespace potential_kind;
        return std::visit(
            [&](const auto& k) -> Point2 {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, Zero>) {
                    return {};
                } else if constexpr (std::is_same_v<T, RadialPower>) {
                    const double r2 = p.norm2();
                    if (r2 == 0.0) return {};
                    const double f = k.s * std::pow(r2, 0.5 * k.s - 1.0);
                    return f * p;
                } else if constexpr (std::is_same_v<T, Quadratic>) {
                    return {2.0 * k.a * p.x + k.b * p.y, k.b * p.x + 2.0 * k.c * p.y};
                } else if constexpr (std::is_same_v<T, Grid>) {
                    return grid_eval(k, p).grad;
                } else {
                    // Zero where the cap binds; the kink on {V = cap} is not smoothed.
                    if (k.inner->value(p) >= k.cap) return {};
                    return k.inner->gradient(p);
                }
            },
            kind_);
    }

    /// Sup norm of the Laplacian. Analytic for zero, quadratic and |x|^2;
    /// +inf for |x|^s with s != 2 (singular at the origin or unbounded at
    /// infinity). Grid potentials use the 5-point stencil
    /// (V[i+1,j] + V[i-1,j] + V[i,j+1] + V[i,j-1] - 4 V[i,j]) / h^2 over
    /// interior nodes. Truncated potentials report the inner bound; the
    /// distributional contribution of the kink on {V = cap} is ignored.
    [[nodiscard]] double laplacian_sup_norm() const {
        using namespace potential_kind;
        return std::visit(
            [&](const auto& k) -> double {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, Zero>) {
                    return 0.0;
                } else if constexpr (std::is_same_v<T, RadialPower>) {
                    return k.s == 2.0 ? 4.0 : kInf;
                } else if constexpr (std::is_same_v<T, Quadratic>) {
                    return std::abs(2.0 * k.a + 2.0 * k.c);
                } else if constexpr (std::is_same_v<T, Grid>) {
                    double sup = 0.0;
                    const double inv_h2 = 1.0 / (k.h * k.h);
                    for (std::size_t j = 1; j + 1 < k.ny; ++j)
                        for (std::size_t i = 1; i + 1 < k.nx; ++i) {
                            const auto at = [&](std::size_t ii, std::size_t jj) { return k.values[jj * k.nx + ii]; };
                            const double lap =
                                (at(i + 1, j) + at(i - 1, j) + at(i, j + 1) + at(i, j - 1) - 4.0 * at(i, j)) * inv_h2;
                            sup = std::max(sup, std::abs(lap));
                        }
                    return sup;
                } else {
                    return k.inner->laplacian_sup_norm();
                }
            },
            kind_);
    }

    /// True for potentials whose value depends on |x| only.
    [[nodiscard]] bool is_radial() const {
        using namespace potential_kind;
        if (std::holds_alternative<Zero>(kind_) || std::holds_alternative<RadialPower>(kind_)) return true;
        if (const auto* q = std::get_if<Quadratic>(&kind_)) return q->b == 0.0 && q->a == q->c;
        if (const auto* t = std::get_if<Truncated>(&kind_)) return t->inner->is_radial();
        return false;
    }

    [[nodiscard]] std::string describe() const {
        using namespace potential_kind;
        std::ostringstream os;
        os.precision(17);
        std::visit(
            [&](const auto& k) {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, Zero>) {
                    os << "zero";
                } else if constexpr (std::is_same_v<T, RadialPower>) {
                    os << "radial_power(" << k.s << ")";
                } else if constexpr (std::is_same_v<T, Quadratic>) {
                    os << "quadratic(" << k.a << "," << k.b << "," << k.c << ")";
                } else if constexpr (std::is_same_v<T, Grid>) {
                    os << "grid(" << k.nx << "x" << k.ny << ",h=" << k.h << ")";
                } else {
                    os << "truncated(" << k.inner->describe() << "," << k.cap << ")";
                }
            },
            kind_);
        return os.str();
    }

private:
    explicit Potential(Kind k) : kind_(std::move(k)) {}

    struct GridSample {
        double value;
        Point2 grad;
    };

    static GridSample grid_eval(const potential_kind::Grid& g, Point2 p) {
        const double xmax = g.x0 + g.h * static_cast<double>(g.nx - 1);
        const double ymax = g.y0 + g.h * static_cast<double>(g.ny - 1);
        const bool x_out = p.x < g.x0 || p.x > xmax;
        const bool y_out = p.y < g.y0 || p.y > ymax;
        const double px = std::clamp(p.x, g.x0, xmax);
        const double py = std::clamp(p.y, g.y0, ymax);
        const double fx = (px - g.x0) / g.h;
        const double fy = (py - g.y0) / g.h;
        auto i = static_cast<std::size_t>(std::floor(fx));
        auto j = static_cast<std::size_t>(std::floor(fy));
        i = std::min(i, g.nx - 2);
        j = std::min(j, g.ny - 2);
        const double tx = fx - static_cast<double>(i);
        const double ty = fy - static_cast<double>(j);
        const double v00 = g.values[j * g.nx + i];
        const double v10 = g.values[j * g.nx + i + 1];
        const double v01 = g.values[(j + 1) * g.nx + i];
        const double v11 = g.values[(j + 1) * g.nx + i + 1];
        const double value = (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 + (1 - tx) * ty * v01 + tx * ty * v11;
        double gx = ((1 - ty) * (v10 - v00) + ty * (v11 - v01)) / g.h;
        double gy = ((1 - tx) * (v01 - v00) + tx * (v11 - v10)) / g.h;
        if (x_out) gx = 0.0;
        if (y_out) gy = 0.0;
        return {value, {gx, gy}};
    }

    Kind kind_{potential_kind::Zero{}};
};

/// V_B = min(V, cap).
inline Potential truncate_potential(const Potential& v, double cap) { return Potential::truncated(v, cap); }

} // namespace lplasma
