#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "lplasma/potential.hpp"
#include "lplasma/types.hpp"

namespace lplasma {

/// Axis-aligned box discretized into square cells of side h.
struct GridDomain {
    double x_min = -2.0;
    double x_max = 2.0;
    double y_min = -2.0;
    double y_max = 2.0;
    double h = 0.01;

    [[nodiscard]] std::size_t nx() const { return static_cast<std::size_t>(std::llround((x_max - x_min) / h)); }
    [[nodiscard]] std::size_t ny() const { return static_cast<std::size_t>(std::llround((y_max - y_min) / h)); }
    [[nodiscard]] Point2 cell_center(std::size_t i, std::size_t j) const {
        return {x_min + (static_cast<double>(i) + 0.5) * h, y_min + (static_cast<double>(j) + 0.5) * h};
    }

    static GridDomain square(double half_width, double h) { return {-half_width, half_width, -half_width, half_width, h}; }
};

enum class TieBreak { lexicographic, reversed };

/// inf { int V rho : 0 <= rho <= max_density, int rho = 1 }.
struct BathtubProblem {
    Potential v;
    double max_density = 1.0 / kPi;
    GridDomain domain;
    TieBreak tie_break = TieBreak::lexicographic;
};

/// Cell-centred density on a GridDomain; values[j * nx + i].
struct GridDensity {
    GridDomain domain;
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::vector<double> values;
    std::vector<double> potential; // V at cell centres
};

struct BathtubResult {
    double energy = 0.0;
    double fill_level = 0.0;
    double mass = 0.0;
    double max_density = 0.0;
    /// Closed form: density max_density on the disk of this radius.
    std::optional<double> disk_radius;
    std::optional<GridDensity> grid;
    /// False if some boundary cell has V below the fill level, i.e. the
    /// domain cuts the sublevel set and the answer is domain-dependent.
    bool sublevel_fits = true;
};

/// Closed form for V = |x|^s and density cap 1/(pi ell_eff): the plateau on the
/// disk of radius sqrt(ell_eff), energy 2/(s+2) ell_eff^(s/2).
inline BathtubResult bathtub_radial_power(double s, double ell_eff) {
    if (!(s > 0.0) || !(ell_eff > 0.0)) throw InvalidArgument("bathtub_radial_power: arguments must be positive");
    BathtubResult r;
    r.energy = 2.0 / (s + 2.0) * std::pow(ell_eff, 0.5 * s);
    r.fill_level = std::pow(ell_eff, 0.5 * s);
    r.mass = 1.0;
    r.max_density = 1.0 / (kPi * ell_eff);
    r.disk_radius = std::sqrt(ell_eff);
    return r;
}

/// Level-set fill: cells sorted by V (ties by cell index, or reversed) are
/// filled at max_density until the mass reaches 1; the last cell is filled
/// fractionally and its V is the fill level.
inline BathtubResult bathtub_solve_grid(const BathtubProblem& prob) {
    const double m = prob.max_density;
    if (!(m > 0.0)) throw InvalidArgument("bathtub: max_density must be positive");
    const auto& dom = prob.domain;
    if (!(dom.h > 0.0) || !(dom.x_max > dom.x_min) || !(dom.y_max > dom.y_min))
        throw InvalidArgument("bathtub: bad grid domain");
    const std::size_t nx = dom.nx(), ny = dom.ny();
    if (nx == 0 || ny == 0) throw InvalidArgument("bathtub: grid has no cells");
    const double area = dom.h * dom.h;
    const double cell_mass = m * area;
    if (cell_mass * static_cast<double>(nx * ny) < 1.0)
        throw InvalidArgument("bathtub: domain too small, fillable mass below 1");

    GridDensity g{dom, nx, ny, std::vector<double>(nx * ny, 0.0), std::vector<double>(nx * ny)};
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i) g.potential[j * nx + i] = prob.v.value(dom.cell_center(i, j));

    std::vector<std::size_t> order(nx * ny);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (prob.tie_break == TieBreak::reversed) std::reverse(order.begin(), order.end());
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return g.potential[a] < g.potential[b]; });

    BathtubResult r;
    r.max_density = m;
    double remaining = 1.0;
    for (std::size_t idx : order) {
        if (remaining <= 0.0) break;
        const double take = std::min(cell_mass, remaining);
        g.values[idx] = take / area;
        remaining -= take;
        r.fill_level = g.potential[idx];
    }
    double mass = 0.0, energy = 0.0;
    for (std::size_t idx : order) {
        if (g.values[idx] == 0.0) break;
        mass += g.values[idx] * area;
        energy += g.potential[idx] * g.values[idx] * area;
    }
    r.mass = mass;
    r.energy = energy;
    for (std::size_t i = 0; i < nx && r.sublevel_fits; ++i)
        for (std::size_t j : {std::size_t{0}, ny - 1})
            if (g.potential[j * nx + i] < r.fill_level) r.sublevel_fits = false;
    for (std::size_t j = 0; j < ny && r.sublevel_fits; ++j)
        for (std::size_t i : {std::size_t{0}, nx - 1})
            if (g.potential[j * nx + i] < r.fill_level) r.sublevel_fits = false;
    r.grid = std::move(g);
    return r;
}

/// Grid solve with an automatic square domain: h is set so that about
/// `target_filled_cells` (at least 1e4) cells are filled, and the box grows
/// until its fillable mass is at least 1 and the sublevel set fits inside.
inline BathtubResult bathtub_solve_auto(const Potential& v, double max_density, double target_filled_cells = 4e4,
                                        TieBreak tie = TieBreak::lexicographic) {
    if (!(max_density > 0.0)) throw InvalidArgument("bathtub: max_density must be positive");
    target_filled_cells = std::max(target_filled_cells, 1e4);
    const double filled_area = 1.0 / max_density;
    const double h = std::sqrt(filled_area / target_filled_cells);
    double half = std::sqrt(filled_area);
    for (int attempt = 0; attempt < 24; ++attempt) {
        const double snapped = h * std::ceil(half / h);
        auto r = bathtub_solve_grid({v, max_density, GridDomain::square(snapped, h), tie});
        if (r.sublevel_fits) return r;
        half *= 1.5;
    }
    throw InvalidArgument("bathtub: sublevel set does not fit in any tried domain (V not increasing at infinity?)");
}

/// Bathtub energies of min(V, cap) for ascending caps.
inline std::vector<std::pair<double, double>> bathtub_continuity_check(const Potential& v, double max_density,
                                                                       const std::vector<double>& caps) {
    if (!std::is_sorted(caps.begin(), caps.end())) throw InvalidArgument("bathtub_continuity_check: caps must ascend");
    std::vector<std::pair<double, double>> out;
    for (double cap : caps) out.emplace_back(cap, bathtub_solve_auto(truncate_potential(v, cap), max_density).energy);
    return out;
}

} // namespace lplasma
