#pragma once

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <future>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "lplasma/bathtub.hpp"
#include "lplasma/config.hpp"
#include "lplasma/gibbs.hpp"
#include "lplasma/ground_state.hpp"
#include "lplasma/io.hpp"
#include "lplasma/rng.hpp"

namespace lplasma {

enum ExitCode : int { kExitOk = 0, kExitAssertion = 1, kExitConfig = 2, kExitNumerical = 3 };

/// One checked (or merely reported) claim of a verification campaign.
struct VerificationReport {
    std::string claim;
    std::size_t n = 0;
    unsigned ell = 0;
    json parameters = json::object();
    double measured = 0.0;
    double bound = 0.0;
    /// measured - threshold, where threshold is the bound after the declared tolerance.
    double margin = 0.0;
    std::string tolerance;
    bool asserted = true;
    bool passed = false;
    /// The minimizer behind this report did not reach its gradient tolerance.
    bool numerical_issue = false;
    double runtime_seconds = 0.0;
    std::vector<std::uint64_t> seeds;
};

inline json to_json(const VerificationReport& r) {
    return {{"claim", r.claim},
            {"parameters", r.parameters},
            {"measured", io_detail::number(r.measured)},
            {"bound", io_detail::number(r.bound)},
            {"margin", io_detail::number(r.margin)},
            {"tolerance", r.tolerance},
            {"asserted", r.asserted},
            {"passed", r.passed},
            {"numerical_issue", r.numerical_issue},
            {"runtime_seconds", r.runtime_seconds},
            {"seeds", r.seeds}};
}

struct RunOutcome {
    int exit_code = kExitOk;
    std::vector<VerificationReport> reports;
    json summary = json::object();
};

/// Exponent s when V is |x|^s (|x|^2 written as quadratic counts as s = 2).
inline std::optional<double> radial_power_exponent(const Potential& v) {
    if (const auto* r = std::get_if<potential_kind::RadialPower>(&v.kind())) return r->s;
    if (const auto* q = std::get_if<potential_kind::Quadratic>(&v.kind()))
        if (q->a == 1.0 && q->c == 1.0 && q->b == 0.0) return 2.0;
    return std::nullopt;
}

/// Bathtub energy with density cap 1/(pi ell_eff): closed form for |x|^s, grid otherwise.
inline double bathtub_energy(const Potential& v, double ell_eff) {
    if (auto s = radial_power_exponent(v)) return bathtub_radial_power(*s, ell_eff).energy;
    return bathtub_solve_auto(v, 1.0 / (kPi * ell_eff)).energy;
}

namespace experiment_detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

inline PlasmaParams params_for(const ExperimentConfig& c, std::size_t n, unsigned ell) {
    return make_params(n, ell, c.epsilon, c.u);
}

inline MinimizeOptions minimize_options(const ExperimentConfig& c, std::uint64_t seed, std::size_t threads) {
    MinimizeOptions o;
    o.max_iterations = c.max_iterations;
    o.gradient_tolerance = c.gradient_tolerance;
    o.restarts = c.restarts;
    o.relocation_moves = c.relocation_moves;
    o.seed = seed;
    o.threads = threads;
    return o;
}

inline ChainOptions chain_options(const ExperimentConfig& c, std::uint64_t seed, std::size_t threads) {
    ChainOptions o;
    o.n_steps = c.n_steps;
    o.burn_in = c.burn_in_steps();
    o.thinning = c.thinning;
    o.proposal_sigma = c.proposal_sigma;
    o.seed = seed;
    o.n_chains = c.n_chains;
    o.threads = threads;
    return o;
}

inline json base_parameters(const ExperimentConfig& c, std::size_t n, unsigned ell) {
    return {{"n", n}, {"ell", ell}, {"epsilon", c.epsilon}, {"u", c.u_desc}, {"factor", c.factor_desc}};
}

inline std::string task_tag(std::size_t n, unsigned ell) {
    return "ell" + std::to_string(ell) + "_n" + std::to_string(n);
}

/// Seeds for task t of a campaign: minimizer = derive(task, 0), chain = derive(task, 1).
struct TaskSeeds {
    std::uint64_t task, minimize, chain, hot_start;
};

inline TaskSeeds task_seeds(std::uint64_t root, std::size_t task) {
    const auto t = derive_seed(root, task);
    return {t, derive_seed(t, 0), derive_seed(t, 1), derive_seed(t, 2)};
}

inline std::vector<VerificationReport> verify_separation_task(const ExperimentConfig& c, std::size_t n, unsigned ell,
                                                              const TaskSeeds& seeds,
                                                              const std::filesystem::path& out_dir) {
    const auto t0 = Clock::now();
    const auto p = params_for(c, n, ell);
    const auto res = minimize(p, *c.factor, minimize_options(c, seeds.minimize, 1));
    const auto audit = audit_separation(res.config, p, c.slack);
    write_configuration_csv(out_dir / ("configuration_" + task_tag(n, ell) + ".csv"), res.config);
    const double runtime = seconds_since(t0);

    std::vector<VerificationReport> out;
    auto base = [&](std::string claim) {
        VerificationReport r;
        r.claim = std::move(claim);
        r.n = n;
        r.ell = ell;
        r.parameters = base_parameters(c, n, ell);
        r.parameters["restarts"] = c.restarts;
        r.parameters["minimizer_energy"] = res.energy.total;
        r.parameters["minimizer_converged"] = res.converged;
        r.numerical_issue = !res.converged;
        r.runtime_seconds = runtime;
        r.seeds = {c.seed, seeds.task, seeds.minimize, res.best_seed};
        return r;
    };

    {
        auto r = base("prop-2.1");
        r.measured = audit.min_distance;
        r.bound = audit.bound_l_delta;
        r.margin = audit.min_distance - audit.bound_l_delta * (1.0 - c.slack);
        r.tolerance = "multiplicative slack " + std::to_string(c.slack);
        r.parameters["bound_l0"] = audit.bound_l0;
        r.parameters["delta"] = audit.delta;
        r.parameters["truncated_potential"] = audit.truncated_potential;
        r.passed = audit.passed;
        out.push_back(std::move(r));
    }
    if (const auto* pair = dynamic_cast<const PairPolynomial*>(c.factor.get());
        pair && pair->is_pure_difference() && pair->difference_power() > 0) {
        // prod (z_i - z_j)^p behaves as the exponent l + p.
        auto r = base("prop-2.1-shifted");
        const double shifted = std::sqrt(static_cast<double>(ell + pair->difference_power()) / static_cast<double>(n - 1)) *
                               (1.0 - audit.delta);
        r.measured = audit.min_distance;
        r.bound = shifted;
        r.margin = audit.min_distance - shifted * (1.0 - c.slack);
        r.tolerance = "multiplicative slack " + std::to_string(c.slack);
        r.parameters["effective_ell"] = ell + pair->difference_power();
        r.passed = r.margin >= 0.0;
        out.push_back(std::move(r));
    }
    {
        // Disks of radius L = L_delta / 2 are disjoint iff min distance >= L_delta;
        // then sup rho~ = 1 / (N pi L^2) exactly.
        const auto rho = SmearedDensity(res.config, 0.5 * audit.bound_l_delta);
        auto r = base("cor-2.2-construction");
        r.measured = rho.sup_bound();
        r.bound = rho.atom_height();
        r.margin = r.bound - r.measured;
        r.tolerance = "exact (non-overlap)";
        const double displayed_constant = 4.0 / (kPi * ell) *
                                      (1.0 + 8.0 * std::sqrt(p.epsilon * (p.epsilon == 0.0 ? 0.0 : p.u.laplacian_sup_norm()))) *
                                      (1.0 - 1.0 / static_cast<double>(n));
        r.parameters["radius"] = rho.radius();
        r.parameters["displayed_constant"] = displayed_constant;
        r.parameters["max_overlap"] = rho.max_depth();
        r.passed = rho.max_depth() == 1;
        out.push_back(std::move(r));
    }
    return out;
}

inline std::vector<VerificationReport> verify_theorem_task(const ExperimentConfig& c, std::size_t n, unsigned ell,
                                                           const TaskSeeds& seeds,
                                                           const std::filesystem::path& out_dir) {
    const auto t0 = Clock::now();
    const auto p = params_for(c, n, ell);
    const auto res = minimize(p, *c.factor, minimize_options(c, seeds.minimize, 1));
    Configuration init = res.config;
    if (c.hot_start) {
        Rng rng(seeds.hot_start);
        init = detail::gaussian_cloud(n, ell, rng);
    }
    auto copts = chain_options(c, seeds.chain, 1);
    copts.n_chains = 1;
    const auto chain = sample(p, *c.factor, init, copts);
    const auto e = estimate_scaled_energy(chain.samples, c.theorem_potential);
    const double floor = bathtub_energy(c.theorem_potential, 0.25 * ell);
    const double conjecture = bathtub_energy(c.theorem_potential, static_cast<double>(ell));
    const double runtime = seconds_since(t0);
    write_configuration_csv(out_dir / ("configuration_" + task_tag(n, ell) + ".csv"), res.config);

    std::vector<VerificationReport> out;
    auto base = [&](std::string claim) {
        VerificationReport r;
        r.claim = std::move(claim);
        r.n = n;
        r.ell = ell;
        r.parameters = base_parameters(c, n, ell);
        r.parameters["potential"] = c.theorem_potential_desc;
        r.parameters["n_steps"] = c.n_steps;
        r.parameters["burn_in"] = c.burn_in_steps();
        r.parameters["thinning"] = c.thinning;
        r.parameters["acceptance_rate"] = chain.acceptance_rate;
        r.parameters["scaled_energy_std_error"] = e.std_error;
        r.runtime_seconds = runtime;
        r.seeds = {c.seed, seeds.task, seeds.minimize, seeds.chain};
        return r;
    };
    {
        auto r = base("thm-1.1-floor");
        r.measured = e.mean;
        r.bound = floor;
        r.margin = e.mean - (floor - 3.0 * e.std_error);
        r.tolerance = "3 standard errors";
        r.passed = r.margin >= 0.0;
        out.push_back(std::move(r));
    }
    {
        // Conjectured optimal constant: reported, never asserted.
        auto r = base("thm-1.1-conjecture");
        r.asserted = false;
        r.measured = e.mean;
        r.bound = conjecture;
        r.margin = e.mean - (conjecture - 3.0 * e.std_error);
        r.tolerance = "3 standard errors (not asserted)";
        r.parameters["relative_deviation"] = (e.mean - conjecture) / conjecture;
        r.passed = r.margin >= 0.0;
        out.push_back(std::move(r));
    }
    {
        auto r = base("gibbs-gap");
        const auto ce = chain_energy(chain);
        r.measured = ce.mean;
        r.bound = res.energy.total;
        r.margin = ce.mean - (res.energy.total - 3.0 * ce.std_error);
        r.tolerance = "3 standard errors";
        r.passed = ground_state_energy_gap_check(chain, res.energy.total);
        out.push_back(std::move(r));
    }
    {
        // A chain state below the minimizer means the restarts missed a lower minimum.
        auto r = base("gibbs-ordering");
        r.asserted = false;
        r.measured = *std::min_element(chain.energy_trace.begin(), chain.energy_trace.end());
        r.bound = res.energy.total;
        r.margin = r.measured - (res.energy.total - 1e-6);
        r.tolerance = "1e-6 absolute (flag only)";
        r.passed = r.margin >= 0.0;
        out.push_back(std::move(r));
    }
    if (c.factor->is_trivial() && c.epsilon == 0.0) {
        const double r_max = c.r_max ? *c.r_max : 2.0 * std::sqrt(static_cast<double>(ell));
        const auto d = estimate_radial_density(chain.samples, c.bins, r_max);
        write_density_csv(out_dir / ("density_" + task_tag(n, ell) + ".csv"), d);
        const double target = 1.0 / (kPi * ell);
        const double r_in = 0.8 * std::sqrt(static_cast<double>(ell));
        double worst = 0.0;
        std::size_t used = 0;
        for (std::size_t k = 0; k < d.values.size(); ++k) {
            if (d.edges[k + 1] > r_in + 1e-12) break;
            worst = std::max(worst, std::abs(d.values[k] - target) / target);
            ++used;
        }
        auto r = base("laughlin-saturation");
        r.measured = worst;
        r.bound = c.saturation_tolerance;
        r.margin = c.saturation_tolerance - worst;
        r.tolerance = "max relative deviation of interior bins";
        r.parameters["target_density"] = target;
        r.parameters["interior_bins"] = used;
        r.passed = used > 0 && worst <= c.saturation_tolerance;
        out.push_back(std::move(r));
    }
    return out;
}

template <class Task>
std::vector<VerificationReport> run_grid(const ExperimentConfig& c, std::size_t threads, Task&& task) {
    std::vector<std::tuple<std::size_t, unsigned, std::size_t>> grid;
    std::size_t index = 0;
    for (unsigned ell : c.ell_values)
        for (std::size_t n : c.n_values) grid.emplace_back(n, ell, index++);
    std::vector<std::vector<VerificationReport>> results(grid.size());
    for (std::size_t start = 0; start < grid.size(); start += threads) {
        std::vector<std::future<std::vector<VerificationReport>>> batch;
        const std::size_t stop = std::min(grid.size(), start + threads);
        for (std::size_t k = start; k < stop; ++k) {
            const auto [n, ell, t] = grid[k];
            const auto seeds = task_seeds(c.seed, t);
            if (threads == 1) {
                results[k] = task(n, ell, seeds);
            } else {
                batch.push_back(std::async(std::launch::async, [&, n = n, ell = ell, seeds] { return task(n, ell, seeds); }));
            }
        }
        if (threads > 1)
            for (std::size_t k = start; k < stop; ++k) results[k] = batch[k - start].get();
    }
    std::vector<VerificationReport> all;
    for (auto& r : results) all.insert(all.end(), r.begin(), r.end());
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return std::tie(a.claim, a.ell, a.n) < std::tie(b.claim, b.ell, b.n);
    });
    return all;
}

inline int exit_code_for(const std::vector<VerificationReport>& reports) {
    int code = kExitOk;
    for (const auto& r : reports) {
        if (!r.asserted || r.passed) continue;
        if (r.numerical_issue) return kExitNumerical;
        code = kExitAssertion;
    }
    return code;
}

} // namespace experiment_detail

/// Runs one experiment and writes its artifacts under c.output_dir. Every
/// JSON artifact embeds the resolved configuration and the seeds used.
inline RunOutcome run_experiment(const ExperimentConfig& c, std::ostream& log) {
    using namespace experiment_detail;
    namespace fs = std::filesystem;
    const fs::path out_dir = c.output_dir;
    fs::create_directories(out_dir);
    {
        auto f = io_detail::open_out(out_dir / "config.txt");
        f << c.dump();
    }
    RunOutcome outcome;
    json summary{{"experiment", to_string(c.experiment)}, {"root_seed", c.seed}, {"config", c.entries}};
    const auto t0 = Clock::now();

    switch (c.experiment) {
    case ExperimentKind::minimize: {
        const auto p = params_for(c, c.n_values[0], c.ell_values[0]);
        const auto seeds = task_seeds(c.seed, 0);
        const auto res = minimize(p, *c.factor, minimize_options(c, seeds.minimize, c.threads));
        write_configuration_csv(out_dir / "configuration.csv", res.config);
        summary["seeds"] = {{"task", seeds.task}, {"minimize", seeds.minimize}, {"best_restart_seed", res.best_seed}};
        summary["result"] = to_json(res);
        if (p.n >= 2) {
            try {
                summary["audit"] = to_json(audit_separation(res.config, p, c.slack));
            } catch (const InvalidArgument& e) {
                summary["audit_error"] = e.what();
            }
        }
        log << "minimize: E = " << res.energy.total << (res.converged ? "" : " (not converged)") << "\n";
        outcome.exit_code = res.converged ? kExitOk : kExitNumerical;
        break;
    }
    case ExperimentKind::sample:
    case ExperimentKind::density: {
        const auto p = params_for(c, c.n_values[0], c.ell_values[0]);
        const auto seeds = task_seeds(c.seed, 0);
        const auto res = minimize(p, *c.factor, minimize_options(c, seeds.minimize, c.threads));
        Configuration init = res.config;
        if (c.hot_start) {
            Rng rng(seeds.hot_start);
            init = detail::gaussian_cloud(p.n, p.ell, rng);
        }
        const auto chains = sample_chains(p, *c.factor, init, chain_options(c, seeds.chain, c.threads));
        summary["seeds"] = {{"task", seeds.task}, {"minimize", seeds.minimize}, {"chain_root", seeds.chain}};
        summary["minimizer"] = to_json(res);
        json jc = json::array();
        std::vector<Configuration> pooled;
        for (std::size_t k = 0; k < chains.size(); ++k) {
            auto s = chain_summary(chains[k]);
            const auto r2 = estimate_scaled_energy(chains[k].samples, Potential::quadratic());
            s["mean_r2"] = r2.mean;
            s["mean_r2_std_error"] = r2.std_error;
            s["gap_check_passed"] = ground_state_energy_gap_check(chains[k], res.energy.total);
            jc.push_back(std::move(s));
            if (c.write_samples)
                write_samples_csv(out_dir / ("samples_chain" + std::to_string(k) + ".csv"), chains[k],
                                  c.burn_in_steps(), c.thinning);
            pooled.insert(pooled.end(), chains[k].samples.begin(), chains[k].samples.end());
        }
        summary["chains"] = jc;
        if (c.experiment == ExperimentKind::density) {
            const double r_max = c.r_max ? *c.r_max : 2.0 * std::sqrt(static_cast<double>(p.ell));
            const auto d = estimate_radial_density(pooled, c.bins, r_max);
            write_density_csv(out_dir / "density.csv", d);
            summary["density"] = to_json(d);
        }
        log << to_string(c.experiment) << ": " << chains.size() << " chain(s), acceptance "
            << chains.front().acceptance_rate << "\n";
        break;
    }
    case ExperimentKind::bathtub: {
        const unsigned ell = c.ell_values[0];
        const double m = c.bathtub_cap(ell);
        const auto r = c.bathtub_half_width
                           ? bathtub_solve_grid({c.bathtub_potential, m, GridDomain::square(*c.bathtub_half_width, c.bathtub_h)})
                           : bathtub_solve_auto(c.bathtub_potential, m);
        summary["result"] = to_json(r);
        summary["parameters"] = {{"potential", c.bathtub_potential_desc}, {"max_density", m}, {"ell", ell}};
        if (auto s = radial_power_exponent(c.bathtub_potential)) {
            const auto closed = bathtub_radial_power(*s, 1.0 / (kPi * m));
            summary["closed_form"] = to_json(closed);
            summary["relative_difference"] = (r.energy - closed.energy) / closed.energy;
        }
        if (c.write_grid && r.grid) write_bathtub_grid_csv(out_dir / "bathtub_grid.csv", *r.grid);
        log << "bathtub: energy " << r.energy << ", fill level " << r.fill_level << "\n";
        if (!r.sublevel_fits) outcome.exit_code = kExitNumerical;
        break;
    }
    case ExperimentKind::verify_separation: {
        for (auto n : c.n_values)
            if (n < 2) throw ConfigError("verify-separation needs plasma.n >= 2");
        outcome.reports = run_grid(c, c.threads, [&](std::size_t n, unsigned ell, const TaskSeeds& s) {
            return verify_separation_task(c, n, ell, s, out_dir);
        });
        outcome.exit_code = exit_code_for(outcome.reports);
        break;
    }
    case ExperimentKind::verify_theorem: {
        for (auto n : c.n_values)
            if (n < 2) throw ConfigError("verify-theorem needs plasma.n >= 2");
        outcome.reports = run_grid(c, c.threads, [&](std::size_t n, unsigned ell, const TaskSeeds& s) {
            return verify_theorem_task(c, n, ell, s, out_dir);
        });
        outcome.exit_code = exit_code_for(outcome.reports);
        break;
    }
    }

    if (!outcome.reports.empty()) {
        json jr = json::array();
        for (const auto& r : outcome.reports) {
            jr.push_back(to_json(r));
            log << (r.asserted ? (r.passed ? "PASS " : "FAIL ") : "INFO ") << r.claim << " ell=" << r.ell
                << " n=" << r.n << " measured=" << r.measured << " bound=" << r.bound << "\n";
        }
        summary["reports"] = jr;
    }
    summary["exit_code"] = outcome.exit_code;
    summary["runtime_seconds"] = seconds_since(t0);
    write_json(out_dir / (c.experiment == ExperimentKind::verify_separation ||
                                  c.experiment == ExperimentKind::verify_theorem
                              ? "reports.json"
                              : to_string(c.experiment) + ".json"),
               summary);
    outcome.summary = std::move(summary);
    return outcome;
}

/// Exit-code wrapper: configuration problems map to 2, singular numerics to 3.
inline int run_experiment_safely(const ExperimentConfig& c, std::ostream& log) {
    try {
        return run_experiment(c, log).exit_code;
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DensityRangeError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const InvalidArgument& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SingularConfiguration& e) {
        log << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}

} // namespace lplasma
