#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <optional>
#include <random>
#include <tuple>
#include <vector>

#include "lplasma/hamiltonian.hpp"
#include "lplasma/quadrature.hpp"
#include "lplasma/rng.hpp"

namespace lplasma {

struct MinimizeOptions {
    std::size_t max_iterations = 200000;
    /// Sup norm of the gradient at which descent stops; unset means 1e-8 * N.
    std::optional<double> gradient_tolerance;
    std::size_t restarts = 1;
    bool relocation_moves = true;
    std::uint64_t seed = 1;
    /// Worker threads for independent restarts. The result does not depend on it.
    std::size_t threads = 1;
    /// Upper bound on relocation-sweep / re-descent rounds per restart.
    std::size_t max_relocation_rounds = 8;
    /// Records every accepted descent step's energy change (debug aid, costs memory).
    bool record_steps = false;

    [[nodiscard]] double tolerance_for(std::size_t n) const {
        return gradient_tolerance ? *gradient_tolerance : 1e-8 * static_cast<double>(n);
    }

    void validate() const {
        if (max_iterations < 1) throw InvalidArgument("minimize: max_iterations must be >= 1");
        if (gradient_tolerance && !(*gradient_tolerance > 0.0))
            throw InvalidArgument("minimize: gradient_tolerance must be > 0");
        if (restarts < 1) throw InvalidArgument("minimize: restarts must be >= 1");
        if (threads < 1) throw InvalidArgument("minimize: threads must be >= 1");
    }
};

struct MinimizeResult {
    Configuration config;
    EnergyBreakdown energy;
    bool converged = false;
    double gradient_norm = kInf;
    std::size_t iterations = 0;
    std::size_t relocations_accepted = 0;
    std::size_t best_restart = 0;
    std::uint64_t best_seed = 0;
    std::size_t restarts = 0;
    std::vector<double> restart_energies;
    std::vector<double> accepted_steps;
};

namespace detail {

struct DescentStats {
    std::size_t iterations = 0;
    bool converged = false;
    double gradient_norm = kInf;
};

inline double dot(const std::vector<Point2>& a, const std::vector<Point2>& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j].x * b[j].x + a[j].y * b[j].y;
    return s;
}

/// Gradient descent with Armijo backtracking (factor 1/2, slope 1e-4). The
/// first trial step is the Barzilai-Borwein length of the previous iteration.
inline DescentStats descend(Configuration& x, const PlasmaParams& p, const CorrelationFactor& f, double tolerance,
                            std::size_t max_iterations, std::vector<double>* accepted) {
    constexpr double kSlope = 1e-4;
    constexpr double kShrink = 0.5;
    constexpr int kMaxBacktracks = 80;

    DescentStats stats;
    auto g = gradient(x, p, f);
    double step = 1e-2;
    Configuration trial(x.size());
    while (stats.iterations < max_iterations) {
        stats.gradient_norm = sup_norm(g);
        if (stats.gradient_norm <= tolerance) {
            stats.converged = true;
            return stats;
        }
        const double gg = dot(g, g);
        double alpha = step;
        bool ok = false;
        double de = 0.0;
        for (int k = 0; k < kMaxBacktracks; ++k) {
            for (std::size_t j = 0; j < x.size(); ++j) trial[j] = x[j] - alpha * g[j];
            de = energy_difference(x, trial, p, f);
            if (de < 0.0 && de <= -kSlope * alpha * gg) {
                ok = true;
                break;
            }
            alpha *= kShrink;
        }
        if (!ok) break; // no representable decrease left
        if (accepted) accepted->push_back(de);
        auto g_new = gradient(trial, p, f);
        double sy = 0.0, ss = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            const Point2 s = trial[j] - x[j];
            const Point2 y = g_new[j] - g[j];
            sy += s.x * y.x + s.y * y.y;
            ss += s.norm2();
        }
        step = sy > 0.0 ? std::clamp(ss / sy, 1e-12, 1e6) : 2.0 * alpha;
        std::swap(x, trial);
        g = std::move(g_new);
        ++stats.iterations;
    }
    stats.gradient_norm = sup_norm(g);
    stats.converged = stats.gradient_norm <= tolerance;
    return stats;
}

inline std::size_t nearest_neighbor(const Configuration& x, std::size_t i) {
    std::size_t best = i;
    double best_d = kInf;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (k == i) continue;
        const double d = (x[k] - x[i]).norm2();
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

inline Configuration gaussian_cloud(std::size_t n, unsigned ell, Rng& rng) {
    // Per-point E|z|^2 = ell / 2, the second moment of the uniform disk of radius sqrt(ell).
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.25 * static_cast<double>(ell)));
    Configuration c(n);
    for (auto& z : c) {
        const double x = gauss(rng);
        const double y = gauss(rng);
        z = {x, y};
    }
    return c;
}

} // namespace detail

/// One pass of single-point relocations: each point is tried at 16 equally
/// spaced positions on the circle of radius sqrt(l/(N-1)) around its nearest
/// neighbor and moved to the best one if that strictly lowers the energy.
/// Returns the number of accepted moves.
inline std::size_t relocation_sweep(Configuration& x, const PlasmaParams& p, const CorrelationFactor& f) {
    if (x.size() < 2) return 0;
    constexpr int kAngles = 16;
    const double l0 = std::sqrt(static_cast<double>(p.ell) / static_cast<double>(p.n - 1));
    std::size_t accepted = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::size_t k = detail::nearest_neighbor(x, i);
        double best = 0.0;
        Point2 best_pt = x[i];
        for (int m = 0; m < kAngles; ++m) {
            const double t = 2.0 * kPi * m / kAngles;
            const Point2 cand = x[k] + Point2{l0 * std::cos(t), l0 * std::sin(t)};
            const double d = energy_delta(x, p, f, i, cand);
            if (d < best) {
                best = d;
                best_pt = cand;
            }
        }
        if (best < 0.0) {
            x[i] = best_pt;
            ++accepted;
        }
    }
    return accepted;
}

namespace detail {

inline MinimizeResult minimize_once(const PlasmaParams& p, const CorrelationFactor& f, const MinimizeOptions& opts,
                                    std::uint64_t seed) {
    Rng rng(seed);
    Configuration x = gaussian_cloud(p.n, p.ell, rng);
    for (int attempt = 0; attempt < 100 && total_energy(x, p, f) == kInf; ++attempt) x = gaussian_cloud(p.n, p.ell, rng);
    if (total_energy(x, p, f) == kInf) throw SingularConfiguration("minimize: could not draw a finite-energy start");

    MinimizeResult r;
    const double tol = opts.tolerance_for(p.n);
    std::vector<double>* trace = opts.record_steps ? &r.accepted_steps : nullptr;
    auto stats = descend(x, p, f, tol, opts.max_iterations, trace);
    r.iterations = stats.iterations;
    if (opts.relocation_moves) {
        for (std::size_t round = 0; round < opts.max_relocation_rounds; ++round) {
            const std::size_t moved = relocation_sweep(x, p, f);
            if (moved == 0) break;
            r.relocations_accepted += moved;
            stats = descend(x, p, f, tol, opts.max_iterations, trace);
            r.iterations += stats.iterations;
        }
    }
    r.converged = stats.converged;
    r.gradient_norm = stats.gradient_norm;
    r.energy = energy(x, p, f);
    r.config = std::move(x);
    r.best_seed = seed;
    return r;
}

} // namespace detail

/// Multi-start local minimization of the perturbed Hamiltonian. Starts are
/// Gaussian clouds; each restart descends, then alternates relocation sweeps
/// and re-descent. The best restart by (energy, seed) is returned. Global
/// minimality is not certified.
inline MinimizeResult minimize(const PlasmaParams& p, const CorrelationFactor& f, const MinimizeOptions& opts) {
    p.validate();
    opts.validate();
    std::vector<MinimizeResult> runs(opts.restarts);
    std::vector<std::uint64_t> seeds(opts.restarts);
    for (std::size_t r = 0; r < opts.restarts; ++r) seeds[r] = derive_seed(opts.seed, r);

    if (opts.threads <= 1) {
        for (std::size_t r = 0; r < opts.restarts; ++r) runs[r] = detail::minimize_once(p, f, opts, seeds[r]);
    } else {
        for (std::size_t start = 0; start < opts.restarts; start += opts.threads) {
            std::vector<std::future<MinimizeResult>> batch;
            const std::size_t stop = std::min(opts.restarts, start + opts.threads);
            for (std::size_t r = start; r < stop; ++r)
                batch.push_back(std::async(std::launch::async,
                                           [&, r] { return detail::minimize_once(p, f, opts, seeds[r]); }));
            for (std::size_t r = start; r < stop; ++r) runs[r] = batch[r - start].get();
        }
    }

    std::size_t best = 0;
    for (std::size_t r = 1; r < runs.size(); ++r)
        if (std::tie(runs[r].energy.total, runs[r].best_seed) < std::tie(runs[best].energy.total, runs[best].best_seed))
            best = r;
    MinimizeResult out = std::move(runs[best]);
    out.best_restart = best;
    out.restarts = opts.restarts;
    for (const auto& r : runs) out.restart_energies.push_back(r.energy.total);
    return out;
}

/// Exact minimum over all pairs.
inline double min_pairwise_distance(const Configuration& cfg) {
    if (cfg.size() < 2) throw InvalidArgument("min_pairwise_distance needs at least 2 points");
    double best = kInf;
    for (std::size_t i = 0; i < cfg.size(); ++i)
        for (std::size_t j = i + 1; j < cfg.size(); ++j) best = std::min(best, (cfg[i] - cfg[j]).norm2());
    return std::sqrt(best);
}

struct SeparationAudit {
    double min_distance = 0.0;
    double bound_l0 = 0.0;       // sqrt(l / (N-1))
    double bound_l_delta = 0.0;  // bound_l0 * (1 - delta)
    double delta = 0.0;          // 4 sqrt(eps * |Lap U|_inf)
    double laplacian_sup_norm = 0.0;
    double slack = 0.0;
    bool truncated_potential = false; // |Lap U|_inf ignores the kink of a capped potential
    bool passed = false;
};

/// delta = 4 sqrt(eps |Lap U|_inf); throws when it reaches 1 (bound vacuous).
inline double separation_delta(const PlasmaParams& p) {
    if (p.epsilon == 0.0) return 0.0;
    const double lap = p.u.laplacian_sup_norm();
    const double delta = 4.0 * std::sqrt(p.epsilon * lap);
    if (!(delta < 1.0))
        throw InvalidArgument("separation bound is vacuous: 4 sqrt(eps |Lap U|) >= 1 (eps too large)");
    return delta;
}

inline SeparationAudit audit_separation(const Configuration& cfg, const PlasmaParams& p, double slack = 1e-2) {
    p.validate();
    if (!(slack >= 0.0 && slack < 1.0)) throw InvalidArgument("audit_separation: slack must be in [0, 1)");
    SeparationAudit a;
    a.delta = separation_delta(p);
    a.laplacian_sup_norm = p.epsilon == 0.0 ? 0.0 : p.u.laplacian_sup_norm();
    a.truncated_potential = std::holds_alternative<potential_kind::Truncated>(p.u.kind());
    a.min_distance = min_pairwise_distance(cfg);
    a.bound_l0 = std::sqrt(static_cast<double>(p.ell) / static_cast<double>(p.n - 1));
    a.bound_l_delta = a.bound_l0 * (1.0 - a.delta);
    a.slack = slack;
    a.passed = a.min_distance >= a.bound_l_delta * (1.0 - slack);
    return a;
}

/// Empirical measure with each atom spread uniformly over a disk of radius L:
///   rho(z) = (1/N) sum_j 1{|z - z_j| < L} / (pi L^2).
class SmearedDensity {
public:
    SmearedDensity(Configuration centers, double radius) : centers_(std::move(centers)), radius_(radius) {
        if (centers_.empty()) throw InvalidArgument("smeared density needs at least one point");
        if (!(radius_ > 0.0)) throw InvalidArgument("smeared density radius must be positive");
    }

    [[nodiscard]] const Configuration& centers() const { return centers_; }
    [[nodiscard]] double radius() const { return radius_; }

    /// Height contributed by one disk.
    [[nodiscard]] double atom_height() const {
        return 1.0 / (static_cast<double>(centers_.size()) * kPi * radius_ * radius_);
    }

    [[nodiscard]] double value(Point2 z) const { return static_cast<double>(depth(z)) * atom_height(); }

    /// Essential supremum: maximal number of overlapping open disks times the
    /// height of one disk. Candidates are the centers and points just inside
    /// each lens corner where two circles cross.
    [[nodiscard]] double sup_bound() const { return static_cast<double>(max_depth()) * atom_height(); }

    [[nodiscard]] std::size_t max_depth() const {
        std::size_t best = 0;
        for (const auto& c : centers_) best = std::max(best, depth(c));
        const double r = radius_;
        const double eta = 1e-7 * r;
        for (std::size_t i = 0; i < centers_.size(); ++i)
            for (std::size_t j = i + 1; j < centers_.size(); ++j) {
                const Point2 d = centers_[j] - centers_[i];
                const double dist = d.norm();
                if (dist >= 2.0 * r || dist == 0.0) continue;
                const Point2 u = (1.0 / dist) * d;
                const Point2 v{-u.y, u.x};
                const double h = std::sqrt(r * r - 0.25 * dist * dist);
                const Point2 mid = centers_[i] + 0.5 * dist * u;
                for (double side : {-1.0, 1.0}) {
                    const Point2 q = mid + side * h * v;
                    for (double a : {-1.0, 1.0})
                        for (double b : {-1.0, 1.0}) best = std::max(best, depth(q + eta * (a * u + b * v)));
                }
            }
        return best;
    }

    /// Integral of f against the smeared density (per-disk polar quadrature).
    template <class F>
    [[nodiscard]] double integrate(F&& f) const {
        double sum = 0.0;
        for (const auto& c : centers_) sum += disk_average(f, c, radius_);
        return sum / static_cast<double>(centers_.size());
    }

    /// Integral of f against the empirical measure of the centers.
    template <class F>
    [[nodiscard]] double empirical_average(F&& f) const {
        double sum = 0.0;
        for (const auto& c : centers_) sum += f(c);
        return sum / static_cast<double>(centers_.size());
    }

private:
    [[nodiscard]] std::size_t depth(Point2 z) const {
        const double r2 = radius_ * radius_;
        std::size_t count = 0;
        for (const auto& c : centers_)
            if ((z - c).norm2() < r2) ++count;
        return count;
    }

    Configuration centers_;
    double radius_;
};

/// Radius L = (1/2) sqrt(l/(N-1)) (1 - 4 sqrt(eps |Lap U|_inf)), half the
/// separation bound, so a configuration passing the audit has disjoint disks.
inline double smeared_radius(const PlasmaParams& p, double epsilon_for_radius) {
    PlasmaParams q = p;
    q.epsilon = epsilon_for_radius;
    q.validate();
    if (p.n < 2) throw InvalidArgument("smeared radius needs N >= 2");
    const double l0 = std::sqrt(static_cast<double>(p.ell) / static_cast<double>(p.n - 1));
    return 0.5 * l0 * (1.0 - separation_delta(q));
}

inline SmearedDensity smeared_density(const Configuration& cfg, const PlasmaParams& p, double epsilon_for_radius) {
    return SmearedDensity(cfg, smeared_radius(p, epsilon_for_radius));
}

} // namespace lplasma
