#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lplasma/hamiltonian.hpp"
#include "lplasma/potential.hpp"
#include "lplasma/rng.hpp"
#include "lplasma/statistics.hpp"

namespace lplasma {

struct ChainOptions {
    std::size_t n_steps = 10000;
    std::size_t burn_in = 2000;
    std::size_t thinning = 1;
    /// Gaussian single-particle move scale; unset means 0.6 sqrt(T l).
    std::optional<double> proposal_sigma;
    std::uint64_t seed = 1;
    std::size_t n_chains = 1;
    /// Adapt sigma toward `target_acceptance` during burn-in (frozen afterwards).
    bool tune = true;
    double target_acceptance = 0.3;
    std::size_t threads = 1;

    [[nodiscard]] double sigma_for(const PlasmaParams& p) const {
        return proposal_sigma ? *proposal_sigma : 0.6 * std::sqrt(p.temperature() * static_cast<double>(p.ell));
    }

    void validate() const {
        if (!(n_steps > burn_in)) throw InvalidArgument("chain: n_steps must exceed burn_in");
        if (thinning < 1) throw InvalidArgument("chain: thinning must be >= 1");
        if (proposal_sigma && !(*proposal_sigma > 0.0)) throw InvalidArgument("chain: proposal_sigma must be > 0");
        if (n_chains < 1) throw InvalidArgument("chain: n_chains must be >= 1");
        if (threads < 1) throw InvalidArgument("chain: threads must be >= 1");
        if (!(target_acceptance > 0.0 && target_acceptance < 1.0))
            throw InvalidArgument("chain: target_acceptance must be in (0, 1)");
    }
};

struct ChainOutput {
    std::vector<Configuration> samples;
    double acceptance_rate = 0.0;
    /// Total energy after every post-burn-in sweep.
    std::vector<double> energy_trace;
    std::uint64_t seed = 0;
    std::uint64_t accepted = 0;
    std::uint64_t proposed = 0;
    double proposal_sigma = 0.0;
    bool acceptance_warning = false;
};

/// Metropolis chain for the density proportional to exp(-N H). One step is a
/// sweep of N single-particle Gaussian proposals in index order; acceptance
/// is min(1, exp(-N dH)). Counters and the acceptance rate cover post-burn-in
/// moves only.
inline ChainOutput sample(const PlasmaParams& p, const CorrelationFactor& f, const Configuration& init,
                          const ChainOptions& opts) {
    p.validate();
    opts.validate();
    if (init.size() != p.n) throw InvalidArgument("sample: init length differs from N");
    double current = total_energy(init, p, f);
    if (!std::isfinite(current)) throw InvalidArgument("sample: initial configuration has infinite energy");

    constexpr std::size_t kTuneWindow = 50;
    constexpr std::size_t kResync = 64;
    const double beta = static_cast<double>(p.n);

    ChainOutput out;
    out.seed = opts.seed;
    Rng rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    double sigma = opts.sigma_for(p);
    Configuration x = init;
    std::uint64_t window_acc = 0, window_prop = 0;
    out.samples.reserve((opts.n_steps - opts.burn_in) / opts.thinning);
    out.energy_trace.reserve(opts.n_steps - opts.burn_in);

    for (std::size_t step = 0; step < opts.n_steps; ++step) {
        const bool burning = step < opts.burn_in;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double dx = gauss(rng);
            const double dy = gauss(rng);
            const Point2 cand = x[i] + sigma * Point2{dx, dy};
            const double dh = energy_delta(x, p, f, i, cand);
            const double u = unif(rng);
            const bool accept = dh <= 0.0 || (dh != kInf && u < std::exp(-beta * dh));
            if (accept) {
                x[i] = cand;
                current += dh;
            }
            if (burning) {
                ++window_prop;
                window_acc += accept;
            } else {
                ++out.proposed;
                out.accepted += accept;
            }
        }
        if (burning) {
            if (opts.tune && (step + 1) % kTuneWindow == 0) {
                const double rate = static_cast<double>(window_acc) / static_cast<double>(window_prop);
                sigma *= std::exp(2.0 * (rate - opts.target_acceptance));
                window_acc = window_prop = 0;
            }
        } else {
            const std::size_t k = step - opts.burn_in;
            if (k % kResync == 0) current = total_energy(x, p, f);
            out.energy_trace.push_back(current);
            if ((k + 1) % opts.thinning == 0) out.samples.push_back(x);
        }
    }
    out.proposal_sigma = sigma;
    out.acceptance_rate = out.proposed ? static_cast<double>(out.accepted) / static_cast<double>(out.proposed) : 0.0;
    out.acceptance_warning = out.acceptance_rate < 0.1 || out.acceptance_rate > 0.7;
    return out;
}

/// Independent chains with seeds derive_seed(opts.seed, c).
inline std::vector<ChainOutput> sample_chains(const PlasmaParams& p, const CorrelationFactor& f,
                                              const Configuration& init, const ChainOptions& opts) {
    opts.validate();
    std::vector<ChainOutput> out(opts.n_chains);
    auto run = [&](std::size_t c) {
        ChainOptions o = opts;
        o.seed = derive_seed(opts.seed, c);
        o.n_chains = 1;
        return sample(p, f, init, o);
    };
    if (opts.threads <= 1) {
        for (std::size_t c = 0; c < opts.n_chains; ++c) out[c] = run(c);
        return out;
    }
    for (std::size_t start = 0; start < opts.n_chains; start += opts.threads) {
        std::vector<std::future<ChainOutput>> batch;
        const std::size_t stop = std::min(opts.n_chains, start + opts.threads);
        for (std::size_t c = start; c < stop; ++c) batch.push_back(std::async(std::launch::async, run, c));
        for (std::size_t c = start; c < stop; ++c) out[c] = batch[c - start].get();
    }
    return out;
}

struct DensityEstimate {
    enum class Kind { radial, grid };
    Kind kind = Kind::radial;
    /// Radial: bins + 1 radii. Grid: nx + 1 x-edges then ny + 1 y-edges are in x_edges / y_edges.
    std::vector<double> edges;
    std::vector<double> x_edges;
    std::vector<double> y_edges;
    std::vector<std::uint64_t> counts;
    std::vector<double> areas;
    std::vector<double> values;
    /// sqrt(p (1 - p) / n) / area, valid for independent points.
    std::vector<double> binomial_std_errors;
    /// Batch means over consecutive samples (empty with fewer than 2 samples).
    std::vector<double> batch_std_errors;
    double total_mass = 0.0;
    double excluded_fraction = 0.0;
    std::uint64_t n_points = 0;
};

class DensityRangeError : public InvalidArgument {
public:
    DensityRangeError(const std::string& what, double fraction) : InvalidArgument(what), excluded_fraction(fraction) {}
    double excluded_fraction;
};

namespace detail {

/// Fills values, errors and mass from per-sample bin counts. `bin_of` maps a
/// point to its bin or -1 when outside the range.
template <class BinOf>
void fill_density(DensityEstimate& d, std::span<const Configuration> samples, BinOf&& bin_of) {
    const std::size_t nb = d.areas.size();
    d.counts.assign(nb, 0);
    std::uint64_t total = 0, outside = 0;
    constexpr std::size_t kBatches = 20;
    const std::size_t batches = samples.size() >= 2 ? std::min(kBatches, samples.size()) : 0;
    std::vector<std::vector<std::uint64_t>> batch_counts(batches, std::vector<std::uint64_t>(nb, 0));
    std::vector<std::uint64_t> batch_inside(batches, 0);
    const std::size_t batch_len = batches ? samples.size() / batches : 0;
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const std::size_t b = batches ? std::min(s / batch_len, batches - 1) : 0;
        for (const auto& z : samples[s]) {
            ++total;
            const long k = bin_of(z);
            if (k < 0) {
                ++outside;
                continue;
            }
            ++d.counts[static_cast<std::size_t>(k)];
            if (batches) {
                ++batch_counts[b][static_cast<std::size_t>(k)];
                ++batch_inside[b];
            }
        }
    }
    d.n_points = total;
    d.excluded_fraction = total ? static_cast<double>(outside) / static_cast<double>(total) : 0.0;
    if (d.excluded_fraction > 1e-3)
        throw DensityRangeError("density range excludes " + std::to_string(100.0 * d.excluded_fraction) +
                                    "% of points (limit 0.1%)",
                                d.excluded_fraction);
    const double inside = static_cast<double>(total - outside);
    d.values.assign(nb, 0.0);
    d.binomial_std_errors.assign(nb, 0.0);
    d.total_mass = 0.0;
    for (std::size_t k = 0; k < nb; ++k) {
        const double frac = static_cast<double>(d.counts[k]) / inside;
        d.values[k] = frac / d.areas[k];
        d.binomial_std_errors[k] = std::sqrt(frac * (1.0 - frac) / inside) / d.areas[k];
        d.total_mass += d.values[k] * d.areas[k];
    }
    if (batches >= 2) {
        d.batch_std_errors.assign(nb, 0.0);
        for (std::size_t k = 0; k < nb; ++k) {
            std::vector<double> per_batch(batches);
            for (std::size_t b = 0; b < batches; ++b)
                per_batch[b] = batch_inside[b] ? static_cast<double>(batch_counts[b][k]) /
                                                     static_cast<double>(batch_inside[b]) / d.areas[k]
                                               : 0.0;
            d.batch_std_errors[k] = batch_means(per_batch, batches).std_error;
        }
    }
}

} // namespace detail

/// Rotation-averaged one-particle density from all points pooled over the
/// samples, normalized so that sum_k value_k * annulus_area_k = 1.
inline DensityEstimate estimate_radial_density(std::span<const Configuration> samples, std::size_t bins,
                                               double r_max) {
    if (samples.empty()) throw InvalidArgument("estimate_radial_density: no samples");
    if (bins < 1) throw InvalidArgument("estimate_radial_density: bins must be >= 1");
    if (!(r_max > 0.0)) throw InvalidArgument("estimate_radial_density: r_max must be positive");
    DensityEstimate d;
    d.kind = DensityEstimate::Kind::radial;
    d.edges.resize(bins + 1);
    for (std::size_t k = 0; k <= bins; ++k) d.edges[k] = r_max * static_cast<double>(k) / static_cast<double>(bins);
    d.areas.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) d.areas[k] = kPi * (d.edges[k + 1] * d.edges[k + 1] - d.edges[k] * d.edges[k]);
    const double width = r_max / static_cast<double>(bins);
    detail::fill_density(d, samples, [&](Point2 z) -> long {
        const double r = z.norm();
        if (r >= r_max) return -1;
        return static_cast<long>(std::min(bins - 1, static_cast<std::size_t>(r / width)));
    });
    return d;
}

/// Two-dimensional histogram on [x_min, x_max) x [y_min, y_max); bin (i, j) is at index j * nx + i.
inline DensityEstimate estimate_grid_density(std::span<const Configuration> samples, double x_min, double x_max,
                                             double y_min, double y_max, std::size_t nx, std::size_t ny) {
    if (samples.empty()) throw InvalidArgument("estimate_grid_density: no samples");
    if (nx < 1 || ny < 1 || !(x_max > x_min) || !(y_max > y_min))
        throw InvalidArgument("estimate_grid_density: bad grid");
    DensityEstimate d;
    d.kind = DensityEstimate::Kind::grid;
    const double hx = (x_max - x_min) / static_cast<double>(nx);
    const double hy = (y_max - y_min) / static_cast<double>(ny);
    for (std::size_t i = 0; i <= nx; ++i) d.x_edges.push_back(x_min + hx * static_cast<double>(i));
    for (std::size_t j = 0; j <= ny; ++j) d.y_edges.push_back(y_min + hy * static_cast<double>(j));
    d.areas.assign(nx * ny, hx * hy);
    detail::fill_density(d, samples, [&](Point2 z) -> long {
        if (z.x < x_min || z.x >= x_max || z.y < y_min || z.y >= y_max) return -1;
        const auto i = std::min(nx - 1, static_cast<std::size_t>((z.x - x_min) / hx));
        const auto j = std::min(ny - 1, static_cast<std::size_t>((z.y - y_min) / hy));
        return static_cast<long>(j * nx + i);
    });
    return d;
}

/// Chain average of (1/N) sum_j V(z_j), i.e. the integral of V against the
/// one-particle marginal, with a batch-means standard error.
inline MeanEstimate estimate_scaled_energy(std::span<const Configuration> samples, const Potential& v) {
    if (samples.empty()) throw InvalidArgument("estimate_scaled_energy: no samples");
    std::vector<double> per_sample(samples.size());
    std::vector<double> values;
    for (std::size_t s = 0; s < samples.size(); ++s) {
        values.resize(samples[s].size());
        for (std::size_t j = 0; j < values.size(); ++j) values[j] = v.value(samples[s][j]);
        per_sample[s] = running_mean(values);
    }
    return batch_means(per_sample);
}

struct FreeEnergyBound {
    double eta = 0.0;
    double entropy_term = 0.0;     // -log(pi eta^2)
    double confinement_term = 0.0; // sum_j (|z_j|^2 + eta^2/2 + eps U(z_j))
    double interaction_term = 0.0; // Coulomb + correlation at the centers
    double upper_bound = 0.0;
};

inline double default_trial_eta(std::size_t n) { return 1.0 / std::sqrt(2.0 * static_cast<double>(n)); }

/// Free energy of the product of uniform disks of radius eta around z0, with
/// the pair and correlation terms replaced by their values at the centers
/// (an upper bound by superharmonicity). eps U is evaluated at the centers.
inline FreeEnergyBound trial_free_energy_upper_bound(const Configuration& z0, const PlasmaParams& p,
                                                     const CorrelationFactor& f, std::optional<double> eta = {}) {
    p.validate();
    const double e_ = eta ? *eta : default_trial_eta(p.n);
    if (!(e_ > 0.0)) throw InvalidArgument("trial free energy: eta must be positive");
    const auto e = energy(z0, p, f);
    if (!std::isfinite(e.total)) throw InvalidArgument("trial free energy: centers have infinite energy");
    FreeEnergyBound b;
    b.eta = e_;
    b.entropy_term = -std::log(kPi * e_ * e_);
    b.confinement_term = e.confinement + 0.5 * static_cast<double>(p.n) * e_ * e_ + e.perturbation;
    b.interaction_term = e.coulomb + e.correlation;
    b.upper_bound = b.confinement_term + b.interaction_term + b.entropy_term;
    return b;
}

/// Batch-means statistics of the post-burn-in energy trace.
inline MeanEstimate chain_energy(const ChainOutput& chain) { return batch_means(chain.energy_trace); }

/// True iff the mean chain energy is at least e_min - 3 standard errors.
inline bool ground_state_energy_gap_check(const ChainOutput& chain, double e_min) {
    if (chain.energy_trace.empty()) throw InvalidArgument("gap check: empty chain");
    const auto m = chain_energy(chain);
    return m.mean >= e_min - 3.0 * m.std_error;
}

} // namespace lplasma
