// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lplasma/lplasma.hpp"
#include "oracles.hpp"

using namespace lplasma;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool passed = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            passed = false;
            detail << " [failed: " << what << "]";
        }
    }
};

MinimizeOptions best_of(std::size_t restarts, std::uint64_t seed) {
    MinimizeOptions o;
    o.restarts = restarts;
    o.seed = seed;
    return o;
}

ChainOptions chain_opts(std::size_t steps, std::size_t thinning, std::uint64_t seed) {
    ChainOptions o;
    o.n_steps = steps;
    o.burn_in = steps / 5;
    o.thinning = thinning;
    o.seed = seed;
    return o;
}

double seconds(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// 1. eps = 0, F = 1, l in {2, 3}, N in {10, 20, 50, 100}: min distance >= sqrt(l/(N-1)) * 0.99.
void criterion1(Outcome& o) {
    const auto t0 = Clock::now();
    double worst = kInf;
    for (unsigned ell : {2u, 3u})
        for (std::size_t n : {10u, 20u, 50u, 100u}) {
            const auto p = make_params(n, ell);
            const auto r = minimize(p, TrivialFactor{}, best_of(8, derive_seed(1, n * 10 + ell)));
            const double l0 = std::sqrt(double(ell) / double(n - 1));
            const double ratio = min_pairwise_distance(r.config) / l0;
            worst = std::min(worst, ratio);
            o.require(ratio >= 0.99, "l=" + std::to_string(ell) + " N=" + std::to_string(n));
        }
    const double t = seconds(t0);
    o.require(t < 120.0, "runtime");
    o.detail << "worst min_dist/L0 = " << worst << ", runtime " << t << " s";
}

// 2. pair and one-body factors, N in {10, 50}; the pair case also meets the l+1 bound.
void criterion2(Outcome& o) {
    double worst_pair = kInf, worst_shift = kInf, worst_one = kInf;
    for (unsigned ell : {2u, 3u})
        for (std::size_t n : {10u, 50u}) {
            const auto p = make_params(n, ell);
            const auto rp = minimize(p, *laughlin_pair_factor(), best_of(8, derive_seed(2, n * 10 + ell)));
            const auto ro = minimize(p, *origin_one_body_factor(), best_of(8, derive_seed(3, n * 10 + ell)));
            const double l0 = std::sqrt(double(ell) / double(n - 1));
            const double l1 = std::sqrt(double(ell + 1) / double(n - 1));
            const double dp = min_pairwise_distance(rp.config), d1 = min_pairwise_distance(ro.config);
            worst_pair = std::min(worst_pair, dp / l0);
            worst_shift = std::min(worst_shift, dp / l1);
            worst_one = std::min(worst_one, d1 / l0);
            const std::string tag = " l=" + std::to_string(ell) + " N=" + std::to_string(n);
            o.require(dp >= 0.99 * l0, "pair" + tag);
            o.require(dp >= 0.99 * l1, "pair l+1" + tag);
            o.require(d1 >= 0.99 * l0, "one-body" + tag);
        }
    o.detail << "worst ratios: pair/L0 " << worst_pair << ", pair/L0(l+1) " << worst_shift << ", one-body/L0 "
             << worst_one;
}

// 3. N = 2: separation sqrt(2l) and energy l - l log(2l) within 1e-6.
void criterion3(Outcome& o) {
    double worst = 0.0;
    for (unsigned ell : {1u, 2u, 3u, 6u}) {
        const auto r = minimize(make_params(2, ell), TrivialFactor{}, best_of(1, ell));
        const double sep_err = std::abs(distance(r.config[0], r.config[1]) - std::sqrt(2.0 * ell));
        const double e_err = std::abs(r.energy.total - (2.0 * (ell / 2.0) - 2.0 * ell * std::log(std::sqrt(2.0 * ell))));
        worst = std::max({worst, sep_err, e_err});
        o.require(sep_err <= 1e-6 && e_err <= 1e-6, "l=" + std::to_string(ell));
    }
    o.detail << "max abs error " << worst;
}

// 4. Grid bathtub vs 2/(s+2) l^(s/2) within 2%; closed form exact.
void criterion4(Outcome& o) {
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (double s : {1.0, 2.0, 4.0})
        for (double l : {0.5, 1.0, 2.0, 4.0}) {
            const double exact = 2.0 / (s + 2.0) * std::pow(l, s / 2.0);
            o.require(bathtub_radial_power(s, l).energy == exact, "closed form s=" + std::to_string(s));
            const double g = bathtub_solve_auto(Potential::radial_power(s), 1.0 / (kPi * l)).energy;
            worst = std::max(worst, std::abs(g - exact) / exact);
        }
    o.require(worst <= 0.02, "grid tolerance");
    const double t = seconds(t0);
    o.require(t < 30.0, "runtime");
    o.detail << "worst relative error " << worst << ", runtime " << t << " s";
}

struct LaughlinRun {
    ChainOutput chain;
    double runtime = 0.0;
};

LaughlinRun laughlin_chain(const CorrelationFactor& f, std::size_t sweeps, std::uint64_t seed) {
    const auto t0 = Clock::now();
    const auto p = make_params(100, 2);
    const auto init = minimize(p, f, best_of(1, seed)).config;
    LaughlinRun r;
    r.chain = sample(p, f, init, chain_opts(sweeps, 10, derive_seed(seed, 1)));
    r.runtime = seconds(t0);
    return r;
}

// 5. F = 1, l = 2, N = 100, 2e5 sweeps: bins with r <= 0.8 sqrt(l) within 15% of 1/(pi l).
void criterion5(Outcome& o, const LaughlinRun& run) {
    const double ell = 2.0, target = 1.0 / (kPi * ell);
    const auto d = estimate_radial_density(run.chain.samples, 40, 2.0 * std::sqrt(ell));
    double worst = 0.0;
    std::size_t used = 0;
    for (std::size_t k = 0; k < d.values.size() && d.edges[k + 1] <= 0.8 * std::sqrt(ell) + 1e-12; ++k, ++used)
        worst = std::max(worst, std::abs(d.values[k] - target) / target);
    o.require(used > 0, "no interior bins");
    o.require(worst <= 0.15, "density tolerance");
    o.require(run.runtime < 600.0, "runtime");
    o.detail << used << " interior bins, worst relative deviation " << worst << " (target " << target
             << "), acceptance " << run.chain.acceptance_rate << ", runtime " << run.runtime << " s";
}

// 6. V = |x|^2, l = 2, N = 100: scaled energy >= 0.25 - 3 SE for F = 1 and F = pair.
void criterion6(Outcome& o, const LaughlinRun& trivial, const LaughlinRun& pair) {
    const auto v = Potential::radial_power(2.0);
    const double floor = bathtub_radial_power(2.0, 0.5).energy;
    const auto et = estimate_scaled_energy(trivial.chain.samples, v);
    const auto ep = estimate_scaled_energy(pair.chain.samples, v);
    o.require(et.mean >= floor - 3.0 * et.std_error, "trivial floor");
    o.require(ep.mean >= floor - 3.0 * ep.std_error, "pair floor");
    const double conj = bathtub_radial_power(2.0, 2.0).energy;
    o.detail << "floor " << floor << "; trivial " << et.mean << " +- " << et.std_error << "; pair " << ep.mean
             << " +- " << ep.std_error << "; conjecture E_V(l) = " << conj << ", trivial deviation "
             << std::abs(et.mean - conj) / conj * 100.0 << "% (reported, not asserted)";
}

// 7. N = 2, l = 2 chain moments vs quadrature of exp(-2 H_2), 3 SE.
void criterion7(Outcome& o) {
    const auto t0 = Clock::now();
    const auto q = oracle::two_body_quadrature(2);
    const auto c = sample(make_params(2, 2), TrivialFactor{}, {{-1, 0}, {1, 0}}, chain_opts(400000, 1, 77));
    std::vector<double> r1, sep;
    for (const auto& z : c.samples) {
        r1.push_back(z[0].norm2());
        sep.push_back((z[0] - z[1]).norm2());
    }
    const auto m1 = batch_means(r1), ms = batch_means(sep);
    o.require(std::abs(m1.mean - q.mean_r1_sq) <= 3.0 * m1.std_error, "E|z1|^2");
    o.require(std::abs(ms.mean - q.mean_sep_sq) <= 3.0 * ms.std_error, "E|z1-z2|^2");
    const double t = seconds(t0);
    o.require(t < 60.0, "runtime");
    o.detail << "E|z1|^2 " << m1.mean << " +- " << m1.std_error << " vs " << q.mean_r1_sq << "; E|z1-z2|^2 " << ms.mean
             << " +- " << ms.std_error << " vs " << q.mean_sep_sq << ", runtime " << t << " s";
}

// 8. Trial bound >= exact free energy at N = 1 and >= quadrature free energy at N = 2.
void criterion8(Outcome& o) {
    const auto b1 = trial_free_energy_upper_bound({{0, 0}}, make_params(1, 1), TrivialFactor{});
    const double expected1 = 0.25 - std::log(kPi / 2.0);
    o.require(std::abs(b1.upper_bound - expected1) <= 1e-12, "N=1 value");
    o.require(b1.upper_bound >= -std::log(kPi), "N=1 ordering");
    const auto p2 = make_params(2, 2);
    const auto z0 = minimize(p2, TrivialFactor{}, best_of(1, 8)).config;
    const auto b2 = trial_free_energy_upper_bound(z0, p2, TrivialFactor{});
    const auto q = oracle::two_body_quadrature(2);
    o.require(b2.upper_bound >= q.free_energy, "N=2 ordering");
    o.detail << "N=1: " << b1.upper_bound << " >= " << -std::log(kPi) << "; N=2: " << b2.upper_bound
             << " >= " << q.free_energy;
}

// 9. Property suites.
void criterion9(Outcome& o) {
    std::mt19937_64 rng(9);
    // Gradient vs central differences.
    double worst_grad = 0.0;
    const auto p = make_params(6, 2, 0.1, Potential::quadratic(1.0, 0.2, 0.6));
    for (int t = 0; t < 50; ++t) {
        const auto z = oracle::random_cloud(6, 0.8, rng);
        for (const auto& f : {trivial_factor(), laughlin_pair_factor(), origin_one_body_factor()}) {
            const auto g = gradient(z, p, *f);
            double err = 0.0, scale = 1.0;
            for (std::size_t j = 0; j < z.size(); ++j)
                for (int axis = 0; axis < 2; ++axis) {
                    auto zp = z, zm = z;
                    (axis ? zp[j].y : zp[j].x) += 1e-5;
                    (axis ? zm[j].y : zm[j].x) -= 1e-5;
                    const double fd = (total_energy(zp, p, *f) - total_energy(zm, p, *f)) / 2e-5;
                    const double an = axis ? g[j].y : g[j].x;
                    err = std::max(err, std::abs(fd - an));
                    scale = std::max(scale, std::abs(an));
                }
            worst_grad = std::max(worst_grad, err / scale);
        }
    }
    o.require(worst_grad < 1e-5, "gradient");

    // Superharmonicity of W, 5-point stencil at h = 1e-3, 0.5 away from zeros.
    double worst_lap = -kInf;
    const double h = 1e-3;
    for (int t = 0; t < 200; ++t) {
        const auto z = oracle::random_cloud(5, 1.5, rng);
        for (std::size_t j = 0; j < z.size(); ++j) {
            bool near = z[j].norm() < 0.5;
            for (std::size_t k = 0; k < z.size(); ++k) near = near || (k != j && distance(z[j], z[k]) < 0.5);
            if (near) continue;
            for (const auto& f : {laughlin_pair_factor(), origin_one_body_factor()}) {
                auto at = [&](double dx, double dy) {
                    auto w = z;
                    w[j] = w[j] + Point2{dx, dy};
                    return f->w_value(w, z.size());
                };
                worst_lap = std::max(worst_lap, (at(h, 0) + at(-h, 0) + at(0, h) + at(0, -h) - 4 * at(0, 0)) / (h * h));
            }
        }
    }
    o.require(worst_lap <= 1e-4, "superharmonicity");

    // Smeared-density mass by midpoint quadrature.
    const auto pm = make_params(20, 2);
    const auto zm = minimize(pm, TrivialFactor{}, best_of(1, 3)).config;
    const auto rho = smeared_density(zm, pm, 0.0);
    double mass = 0.0;
    const double hq = 2e-3;
    for (double x = -2.5 + hq / 2; x < 2.5; x += hq)
        for (double y = -2.5 + hq / 2; y < 2.5; y += hq) mass += rho.value({x, y});
    mass *= hq * hq;
    o.require(std::abs(mass - 1.0) <= 1e-3, "smeared mass");

    // Bathtub exchange optimality on 100 random filled/unfilled pairs.
    const auto bt = bathtub_solve_grid({Potential::quadratic(1.0, 0.3, 2.0), 1.0 / kPi, GridDomain::square(2, 0.02)});
    const auto& g = *bt.grid;
    std::vector<std::size_t> filled, empty;
    for (std::size_t k = 0; k < g.values.size(); ++k) (g.values[k] > 0 ? filled : empty).push_back(k);
    int exchange_bad = 0, tested = 0;
    const double area = g.domain.h * g.domain.h;
    while (tested < 100) {
        const std::size_t a = filled[rng() % filled.size()], b = empty[rng() % empty.size()];
        if (g.potential[b] == g.potential[a]) continue;
        const double delta = 0.5 * g.values[a] * area;
        if (!(delta * (g.potential[b] - g.potential[a]) > 0.0)) ++exchange_bad;
        ++tested;
    }
    o.require(exchange_bad == 0, "bathtub exchange");

    // Chain bit-reproducibility.
    const auto pc = make_params(10, 2);
    const auto init = minimize(pc, TrivialFactor{}, best_of(1, 4)).config;
    const auto c1 = sample(pc, *laughlin_pair_factor(), init, chain_opts(2000, 5, 123));
    const auto c2 = sample(pc, *laughlin_pair_factor(), init, chain_opts(2000, 5, 123));
    bool same = c1.energy_trace == c2.energy_trace && c1.samples.size() == c2.samples.size();
    for (std::size_t s = 0; same && s < c1.samples.size(); ++s)
        for (std::size_t j = 0; same && j < c1.samples[s].size(); ++j)
            same = c1.samples[s][j].x == c2.samples[s][j].x && c1.samples[s][j].y == c2.samples[s][j].y;
    o.require(same, "reproducibility");

    o.detail << "gradient rel err " << worst_grad << "; max discrete Laplacian " << worst_lap << "; smeared mass "
             << mass << "; exchange violations " << exchange_bad << "/100; chains bit-identical " << (same ? "yes" : "no");
}

} // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const std::string& name, const std::function<void(Outcome&)>& body) {
        Outcome o;
        const auto t0 = Clock::now();
        try {
            body(o);
        } catch (const std::exception& e) {
            o.passed = false;
            o.detail << " exception: " << e.what();
        }
        failures += !o.passed;
        std::printf("[%s] criterion %d: %s: %s (%.1f s)\n", o.passed ? "PASS" : "FAIL", id, name.c_str(),
                    o.detail.str().c_str(), seconds(t0));
        std::fflush(stdout);
    };

    report(1, "separation bound, F = 1", criterion1);
    report(2, "separation bound, pair and one-body factors", criterion2);
    report(3, "N = 2 minimizer oracle", criterion3);
    report(4, "bathtub closed form vs grid", criterion4);

    LaughlinRun trivial, pair;
    report(5, "bulk density saturation, N = 100, l = 2", [&](Outcome& o) {
        trivial = laughlin_chain(TrivialFactor{}, 200000, 5);
        criterion5(o, trivial);
    });
    report(6, "scaled energy floor E_V(l/4), N = 100, l = 2", [&](Outcome& o) {
        if (trivial.chain.samples.empty()) trivial = laughlin_chain(TrivialFactor{}, 200000, 5);
        pair = laughlin_chain(*laughlin_pair_factor(), 50000, 6);
        criterion6(o, trivial, pair);
    });
    report(7, "sampler vs N = 2 quadrature", criterion7);
    report(8, "trial free-energy bound ordering", criterion8);
    report(9, "property suites", criterion9);

    std::printf("%s: %d of 9 criteria failed\n", failures ? "FAILED" : "ALL PASSED", failures);
    return failures ? 1 : 0;
}
