#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "lplasma/correlation.hpp"
#include "lplasma/potential.hpp"
#include "lplasma/types.hpp"

namespace lplasma {

/// Parameters of the perturbed plasma Hamiltonian
///   H(Z) = sum_j (|z_j|^2 + eps U(z_j)) + 2l/(N-1) sum_{i<j} w(z_i - z_j) + W(Z)/(N-1)
/// sampled at temperature T = 1/N.
struct PlasmaParams {
    std::size_t n = 1;
    unsigned ell = 1;
    double epsilon = 0.0;
    Potential u = Potential::zero();

    [[nodiscard]] double temperature() const { return 1.0 / static_cast<double>(n); }

    void validate() const {
        if (n < 1) throw InvalidArgument("plasma: n must be >= 1");
        if (ell < 1) throw InvalidArgument("plasma: ell must be >= 1");
        if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("plasma: epsilon must be >= 0");
    }
};

inline PlasmaParams make_params(std::size_t n, unsigned ell, double epsilon = 0.0, Potential u = Potential::zero()) {
    PlasmaParams p{n, ell, epsilon, std::move(u)};
    p.validate();
    return p;
}

struct EnergyBreakdown {
    double confinement = 0.0;
    double coulomb = 0.0;
    double correlation = 0.0;
    double perturbation = 0.0;
    double total = 0.0;
};

/// w(z) = -log|z|, +inf at the origin.
inline double coulomb_kernel(Point2 z) {
    const double r2 = z.norm2();
    if (r2 == 0.0) return kInf;
    return -0.5 * std::log(r2);
}

namespace detail {

inline double pair_prefactor(const PlasmaParams& p) {
    return 2.0 * static_cast<double>(p.ell) / static_cast<double>(p.n - 1);
}

inline void check_length(const Configuration& cfg, const PlasmaParams& p) {
    if (cfg.size() != p.n)
        throw InvalidArgument("configuration has " + std::to_string(cfg.size()) + " points, expected " +
                              std::to_string(p.n));
}

} // namespace detail

/// Evaluates every term of the perturbed Hamiltonian. Pairs are summed in
/// index-ascending order, so the result is bit-reproducible.
inline EnergyBreakdown energy(const Configuration& cfg, const PlasmaParams& p, const CorrelationFactor& f) {
    detail::check_length(cfg, p);
    EnergyBreakdown e;
    for (const auto& z : cfg) e.confinement += z.norm2();
    if (p.epsilon != 0.0) {
        for (const auto& z : cfg) e.perturbation += p.u.value(z);
        e.perturbation *= p.epsilon;
    }
    if (p.n >= 2) {
        double pairs = 0.0;
        for (std::size_t i = 0; i < cfg.size() && pairs != kInf; ++i)
            for (std::size_t j = i + 1; j < cfg.size(); ++j) {
                const double w = coulomb_kernel(cfg[i] - cfg[j]);
                if (w == kInf) {
                    pairs = kInf;
                    break;
                }
                pairs += w;
            }
        e.coulomb = pairs == kInf ? kInf : detail::pair_prefactor(p) * pairs;
        if (!f.is_trivial()) {
            const double w = f.w_value(cfg, p.n);
            e.correlation = w == kInf ? kInf : w / static_cast<double>(p.n - 1);
        }
    } else if (!f.is_trivial() && f.w_value(cfg, p.n) != 0.0) {
        throw InvalidArgument("correlation term W/(N-1) is undefined for N = 1 with a non-constant factor");
    }
    if (e.coulomb == kInf || e.correlation == kInf)
        e.total = kInf;
    else
        e.total = e.confinement + e.perturbation + e.coulomb + e.correlation;
    return e;
}

inline double total_energy(const Configuration& cfg, const PlasmaParams& p, const CorrelationFactor& f) {
    return energy(cfg, p, f).total;
}

/// dH/dz_j for every particle. Throws SingularConfiguration on coincident points
/// or zeros of F.
inline std::vector<Point2> gradient(const Configuration& cfg, const PlasmaParams& p, const CorrelationFactor& f) {
    detail::check_length(cfg, p);
    std::vector<Point2> g(cfg.size());
    for (std::size_t j = 0; j < cfg.size(); ++j) {
        g[j] = 2.0 * cfg[j];
        if (p.epsilon != 0.0) g[j] += p.epsilon * p.u.gradient(cfg[j]);
    }
    if (p.n < 2) return g;
    const double c = detail::pair_prefactor(p);
    for (std::size_t i = 0; i < cfg.size(); ++i)
        for (std::size_t j = i + 1; j < cfg.size(); ++j) {
            const Point2 d = cfg[i] - cfg[j];
            const double r2 = d.norm2();
            if (r2 == 0.0) throw SingularConfiguration("gradient: coincident points");
            const Point2 force = (c / r2) * d;
            g[i] -= force;
            g[j] += force;
        }
    if (!f.is_trivial()) {
        const auto gw = f.w_gradient(cfg, p.n);
        const double inv = 1.0 / static_cast<double>(p.n - 1);
        for (std::size_t j = 0; j < cfg.size(); ++j) g[j] += inv * gw[j];
    }
    return g;
}

inline double sup_norm(const std::vector<Point2>& g) {
    double m = 0.0;
    for (const auto& v : g) m = std::max({m, std::abs(v.x), std::abs(v.y)});
    return m;
}

/// H(Z with z_index -> moved) - H(Z) in O(N). +inf if the move lands on
/// another particle or on a zero of F.
inline double energy_delta(const Configuration& cfg, const PlasmaParams& p, const CorrelationFactor& f,
                           std::size_t index, Point2 moved) {
    const Point2 old = cfg[index];
    double delta = moved.norm2() - old.norm2();
    if (p.epsilon != 0.0) delta += p.epsilon * (p.u.value(moved) - p.u.value(old));
    if (p.n < 2) return delta;
    // sum_k w(moved - z_k) - w(old - z_k) = -1/2 log prod_k |old - z_k|^-2 |moved - z_k|^2,
    // with the product flushed into a log every few factors to stay in range.
    constexpr std::size_t kChunk = 8;
    double log_sum = 0.0;
    double product = 1.0;
    std::size_t in_chunk = 0;
    for (std::size_t k = 0; k < cfg.size(); ++k) {
        if (k == index) continue;
        const double after = (moved - cfg[k]).norm2();
        if (after == 0.0) return kInf;
        product *= after / (old - cfg[k]).norm2();
        if (++in_chunk == kChunk) {
            log_sum += std::log(product);
            product = 1.0;
            in_chunk = 0;
        }
    }
    log_sum += std::log(product);
    delta += detail::pair_prefactor(p) * (-0.5 * log_sum);
    if (!f.is_trivial()) {
        const double dw = f.w_delta(cfg, p.n, index, moved);
        if (dw == kInf) return kInf;
        delta += dw / static_cast<double>(p.n - 1);
    }
    return delta;
}

/// H(b) - H(a), accumulated term by term from coordinate increments so that the
/// result keeps full relative precision when a and b are close. This is what
/// the line search compares; totals of order N would drown small decreases.
inline double energy_difference(const Configuration& a, const Configuration& b, const PlasmaParams& p,
                                const CorrelationFactor& f) {
    detail::check_length(a, p);
    detail::check_length(b, p);
    double delta = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const Point2 step = b[j] - a[j];
        const Point2 mid2 = b[j] + a[j];
        delta += step.x * mid2.x + step.y * mid2.y;
    }
    if (p.epsilon != 0.0) {
        double du = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) du += p.u.value(b[j]) - p.u.value(a[j]);
        delta += p.epsilon * du;
    }
    if (p.n < 2) return delta;
    double pairs = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            const Point2 before = a[i] - a[j];
            const Point2 after = b[i] - b[j];
            const double r2 = before.norm2();
            if (after.norm2() == 0.0) return kInf;
            const Point2 inc = (b[i] - a[i]) - (b[j] - a[j]);
            const Point2 sum = after + before;
            // w(after) - w(before) = -1/2 log(|after|^2 / |before|^2)
            pairs -= 0.5 * std::log1p((inc.x * sum.x + inc.y * sum.y) / r2);
        }
    delta += detail::pair_prefactor(p) * pairs;
    if (!f.is_trivial()) {
        const double dw = f.w_difference(a, b, p.n);
        if (dw == kInf) return kInf;
        delta += dw / static_cast<double>(p.n - 1);
    }
    return delta;
}

/// Constant c = -(N/2) log(N-1) with W(Z)/(N-1) = 2/(N-1) sum_{i<j} w(z_i - z_j) + c
/// for F = prod_{i<j} (z_i - z_j).
inline double pair_factor_shift_constant(const PlasmaParams& p) {
    if (p.n < 2) throw InvalidArgument("pair_factor_shift_constant needs N >= 2");
    const double n = static_cast<double>(p.n);
    return -0.5 * n * std::log(n - 1.0);
}

} // namespace lplasma
