#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lplasma/bathtub.hpp"

using namespace lplasma;

TEST(ClosedForm, Examples) {
    EXPECT_DOUBLE_EQ(bathtub_radial_power(2, 1).energy, 0.5);
    EXPECT_DOUBLE_EQ(bathtub_radial_power(2, 4).energy, 2.0);
    EXPECT_DOUBLE_EQ(bathtub_radial_power(1, 1).energy, 2.0 / 3.0);
    const auto r = bathtub_radial_power(2, 0.5);
    EXPECT_DOUBLE_EQ(r.fill_level, 0.5);
    EXPECT_DOUBLE_EQ(*r.disk_radius, std::sqrt(0.5));
    EXPECT_DOUBLE_EQ(r.max_density, 1.0 / (kPi * 0.5));
    EXPECT_THROW(bathtub_radial_power(0, 1), InvalidArgument);
    EXPECT_THROW(bathtub_radial_power(2, -1), InvalidArgument);
}

TEST(ClosedForm, ScalingLaw) {
    for (double s : {0.5, 1.0, 2.0, 4.0})
        for (double l : {0.25, 0.5, 3.0, 7.0})
            EXPECT_NEAR(bathtub_radial_power(s, l).energy, std::pow(l, s / 2) * bathtub_radial_power(s, 1).energy,
                        1e-14 * bathtub_radial_power(s, l).energy);
}

TEST(Grid, ConstantPotential) {
    const auto three = Potential::grid(-1, -1, 2, 2, 2, {3, 3, 3, 3});
    const auto r = bathtub_solve_grid({three, 1.0 / kPi, GridDomain::square(2, 0.02)});
    EXPECT_NEAR(r.energy, 3.0, 1e-12);
    EXPECT_NEAR(r.mass, 1.0, 1e-12);
}

TEST(Grid, QuadraticExamples) {
    const auto a = bathtub_solve_grid({Potential::radial_power(2), 1.0 / kPi, GridDomain::square(2, 0.01)});
    EXPECT_NEAR(a.energy, 0.5, 0.01);
    EXPECT_NEAR(a.mass, 1.0, 1e-6);
    EXPECT_TRUE(a.sublevel_fits);
    const auto b = bathtub_solve_grid({Potential::radial_power(2), 4.0 / (kPi * 2.0), GridDomain::square(2, 0.01)});
    EXPECT_NEAR(b.energy, 0.25, 0.005);
}

TEST(Grid, DensityShape) {
    const double m = 1.0 / kPi;
    const auto r = bathtub_solve_grid({Potential::radial_power(2), m, GridDomain::square(2, 0.02)});
    const auto& g = *r.grid;
    std::size_t partial = 0;
    for (std::size_t k = 0; k < g.values.size(); ++k) {
        EXPECT_GE(g.values[k], 0.0);
        EXPECT_LE(g.values[k], m * (1 + 1e-12));
        if (g.potential[k] < r.fill_level) {
            EXPECT_DOUBLE_EQ(g.values[k], m);
        }
        if (g.potential[k] > r.fill_level) {
            EXPECT_EQ(g.values[k], 0.0);
        }
        if (g.values[k] > 0.0 && g.values[k] < m * (1 - 1e-12)) ++partial;
    }
    EXPECT_LE(partial, 1u);
}

TEST(Grid, Errors) {
    EXPECT_THROW(bathtub_solve_grid({Potential::radial_power(2), 1.0 / kPi, GridDomain::square(0.5, 0.01)}),
                 InvalidArgument);
    EXPECT_THROW(bathtub_solve_grid({Potential::radial_power(2), 0.0, GridDomain::square(2, 0.01)}), InvalidArgument);
}

TEST(Grid, SublevelSetOutsideDomainIsFlagged) {
    // Fillable mass is enough, but V < fill level reaches the boundary.
    const auto r = bathtub_solve_grid({Potential::radial_power(2), 1.0 / 3.9, GridDomain::square(1.0, 0.01)});
    EXPECT_FALSE(r.sublevel_fits);
}

TEST(Grid, ExchangeOptimality) {
    const double m = 1.0 / kPi;
    const auto r = bathtub_solve_grid({Potential::quadratic(1.0, 0.3, 2.0), m, GridDomain::square(2, 0.02)});
    const auto& g = *r.grid;
    const double area = g.domain.h * g.domain.h;
    auto energy_of = [&](const std::vector<double>& rho) {
        double e = 0.0;
        for (std::size_t k = 0; k < rho.size(); ++k) e += g.potential[k] * rho[k] * area;
        return e;
    };
    std::vector<std::size_t> filled, empty;
    for (std::size_t k = 0; k < g.values.size(); ++k) (g.values[k] > 0 ? filled : empty).push_back(k);
    std::mt19937_64 rng(1);
    for (int t = 0; t < 100; ++t) {
        const std::size_t a = filled[rng() % filled.size()];
        // Nearest-to-optimal unfilled cells are the informative ones: pick among the lowest V.
        std::size_t b = empty[rng() % empty.size()];
        for (int k = 0; k < 50; ++k) {
            const std::size_t c = empty[rng() % empty.size()];
            if (g.potential[c] < g.potential[b]) b = c;
        }
        ASSERT_GE(g.potential[b], g.potential[a]);
        if (g.potential[b] == g.potential[a]) continue;
        auto rho = g.values;
        const double delta = 0.5 * rho[a];
        rho[a] -= delta;
        rho[b] += delta;
        EXPECT_GT(energy_of(rho), energy_of(g.values));
    }
}

TEST(Grid, MonotoneInDensityCap) {
    double prev = kInf;
    for (double m : {0.1, 0.2, 0.3, 0.5, 1.0, 2.0}) {
        const double e = bathtub_solve_auto(Potential::quadratic(1.0, 0.2, 0.5), m).energy;
        EXPECT_LE(e, prev + 1e-12) << m;
        prev = e;
    }
}

TEST(Grid, TieBreakDoesNotChangeEnergy) {
    // Radial V has many exact ties on a symmetric grid.
    const auto dom = GridDomain::square(2, 0.02);
    const auto a = bathtub_solve_grid({Potential::radial_power(2), 1.0 / kPi, dom, TieBreak::lexicographic});
    const auto b = bathtub_solve_grid({Potential::radial_power(2), 1.0 / kPi, dom, TieBreak::reversed});
    EXPECT_NEAR(a.energy, b.energy, 1e-12);
    EXPECT_EQ(a.fill_level, b.fill_level);
}

TEST(Grid, ClosedFormAgreement) {
    for (double s : {1.0, 2.0, 4.0})
        for (double l : {0.5, 1.0, 2.0, 4.0}) {
            const double exact = bathtub_radial_power(s, l).energy;
            const auto g = bathtub_solve_auto(Potential::radial_power(s), 1.0 / (kPi * l));
            EXPECT_NEAR(g.energy, exact, 0.02 * exact) << "s=" << s << " l=" << l;
            EXPECT_NEAR(g.mass, 1.0, 1e-6);
        }
}

TEST(Continuity, CapsSequence) {
    const auto out = bathtub_continuity_check(Potential::radial_power(2), 1.0 / kPi, {0.5, 1.0, 2.0});
    ASSERT_EQ(out.size(), 3u);
    EXPECT_LT(out[0].second, 0.5 - 0.05);
    EXPECT_NEAR(out[1].second, 0.5, 0.01);
    EXPECT_NEAR(out[2].second, 0.5, 0.01);
    EXPECT_LE(out[0].second, out[1].second);
    EXPECT_LE(out[1].second, out[2].second + 1e-12);
}

TEST(Continuity, CapBelowMinimumAndConstant) {
    const auto low = bathtub_continuity_check(Potential::quadratic(1, 0, 1), 1.0 / kPi, {-1.0});
    EXPECT_NEAR(low[0].second, -1.0, 1e-12);
    const auto flat = bathtub_continuity_check(Potential::quadratic(0, 0, 0), 1.0 / kPi, {0.0, 1.0, 5.0});
    for (const auto& [cap, e] : flat) EXPECT_NEAR(e, 0.0, 1e-12);
    EXPECT_THROW(bathtub_continuity_check(Potential::zero(), 1.0, {2.0, 1.0}), InvalidArgument);
}
