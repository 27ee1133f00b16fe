#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <string>

#include <json.hpp>

#include "lplasma/bathtub.hpp"
#include "lplasma/gibbs.hpp"
#include "lplasma/ground_state.hpp"

namespace lplasma {

using json = nlohmann::json;

namespace io_detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << std::setprecision(17);
    return out;
}

/// JSON has no infinities; they are written as the strings "inf" / "-inf".
inline json number(double v) {
    if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
    if (std::isnan(v)) return json("nan");
    return v;
}

} // namespace io_detail

/// `index,x,y` with header.
inline void write_configuration_csv(const std::filesystem::path& path, const Configuration& cfg) {
    auto out = io_detail::open_out(path);
    out << "index,x,y\n";
    for (std::size_t j = 0; j < cfg.size(); ++j) out << j << ',' << cfg[j].x << ',' << cfg[j].y << '\n';
}

inline Configuration read_configuration_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || line.rfind("index,x,y", 0) != 0)
        throw std::runtime_error("configuration CSV must start with header index,x,y");
    Configuration cfg;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t idx = 0;
        double x = 0, y = 0;
        if (std::sscanf(line.c_str(), "%zu,%lf,%lf", &idx, &x, &y) != 3 || idx != cfg.size())
            throw std::runtime_error("bad configuration CSV row: " + line);
        cfg.push_back({x, y});
    }
    return cfg;
}

/// `step,particle,x,y`; step is the sweep index of each retained sample.
inline void write_samples_csv(const std::filesystem::path& path, const ChainOutput& chain, std::size_t burn_in,
                              std::size_t thinning) {
    auto out = io_detail::open_out(path);
    out << "step,particle,x,y\n";
    for (std::size_t s = 0; s < chain.samples.size(); ++s) {
        const std::size_t step = burn_in + (s + 1) * thinning - 1;
        for (std::size_t j = 0; j < chain.samples[s].size(); ++j)
            out << step << ',' << j << ',' << chain.samples[s][j].x << ',' << chain.samples[s][j].y << '\n';
    }
}

inline void write_density_csv(const std::filesystem::path& path, const DensityEstimate& d) {
    auto out = io_detail::open_out(path);
    const bool batch = !d.batch_std_errors.empty();
    if (d.kind == DensityEstimate::Kind::radial) {
        out << "r_lo,r_hi,count,value,binomial_std_error,batch_std_error\n";
        for (std::size_t k = 0; k < d.values.size(); ++k)
            out << d.edges[k] << ',' << d.edges[k + 1] << ',' << d.counts[k] << ',' << d.values[k] << ','
                << d.binomial_std_errors[k] << ',' << (batch ? d.batch_std_errors[k] : 0.0) << '\n';
    } else {
        const std::size_t nx = d.x_edges.size() - 1;
        out << "x_lo,x_hi,y_lo,y_hi,count,value,binomial_std_error,batch_std_error\n";
        for (std::size_t k = 0; k < d.values.size(); ++k) {
            const std::size_t i = k % nx, j = k / nx;
            out << d.x_edges[i] << ',' << d.x_edges[i + 1] << ',' << d.y_edges[j] << ',' << d.y_edges[j + 1] << ','
                << d.counts[k] << ',' << d.values[k] << ',' << d.binomial_std_errors[k] << ','
                << (batch ? d.batch_std_errors[k] : 0.0) << '\n';
        }
    }
}

/// `x,y,rho` at cell centres.
inline void write_bathtub_grid_csv(const std::filesystem::path& path, const GridDensity& g) {
    auto out = io_detail::open_out(path);
    out << "x,y,rho\n";
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) {
            const Point2 c = g.domain.cell_center(i, j);
            out << c.x << ',' << c.y << ',' << g.values[j * g.nx + i] << '\n';
        }
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    auto out = io_detail::open_out(path);
    out << j.dump(2) << '\n';
}

inline json to_json(const EnergyBreakdown& e) {
    using io_detail::number;
    return {{"confinement", number(e.confinement)},
            {"coulomb", number(e.coulomb)},
            {"correlation", number(e.correlation)},
            {"perturbation", number(e.perturbation)},
            {"total", number(e.total)}};
}

inline json to_json(const SeparationAudit& a) {
    using io_detail::number;
    return {{"min_distance", number(a.min_distance)},
            {"bound_l0", a.bound_l0},
            {"bound_l_delta", a.bound_l_delta},
            {"delta", a.delta},
            {"laplacian_sup_norm", number(a.laplacian_sup_norm)},
            {"slack", a.slack},
            {"truncated_potential", a.truncated_potential},
            {"passed", a.passed}};
}

inline json to_json(const MinimizeResult& r) {
    return {{"energy", to_json(r.energy)},
            {"converged", r.converged},
            {"gradient_norm", io_detail::number(r.gradient_norm)},
            {"iterations", r.iterations},
            {"relocations_accepted", r.relocations_accepted},
            {"restarts", r.restarts},
            {"best_restart", r.best_restart},
            {"best_seed", r.best_seed},
            {"restart_energies", r.restart_energies}};
}

inline json to_json(const DensityEstimate& d) {
    json j{{"kind", d.kind == DensityEstimate::Kind::radial ? "radial" : "grid"},
           {"counts", d.counts},
           {"values", d.values},
           {"binomial_std_errors", d.binomial_std_errors},
           {"batch_std_errors", d.batch_std_errors},
           {"total_mass", d.total_mass},
           {"excluded_fraction", d.excluded_fraction},
           {"n_points", d.n_points}};
    if (d.kind == DensityEstimate::Kind::radial)
        j["edges"] = d.edges;
    else {
        j["x_edges"] = d.x_edges;
        j["y_edges"] = d.y_edges;
    }
    return j;
}

inline json to_json(const FreeEnergyBound& b) {
    return {{"eta", b.eta},
            {"entropy_term", b.entropy_term},
            {"confinement_term", b.confinement_term},
            {"interaction_term", b.interaction_term},
            {"upper_bound", b.upper_bound}};
}

inline json to_json(const BathtubResult& r) {
    json j{{"energy", r.energy},
           {"fill_level", r.fill_level},
           {"mass", r.mass},
           {"max_density", r.max_density},
           {"sublevel_fits", r.sublevel_fits}};
    if (r.disk_radius) j["disk_radius"] = *r.disk_radius;
    if (r.grid) j["grid"] = {{"nx", r.grid->nx}, {"ny", r.grid->ny}, {"h", r.grid->domain.h}};
    return j;
}

inline json chain_summary(const ChainOutput& c) {
    const auto e = chain_energy(c);
    return {{"seed", c.seed},
            {"acceptance_rate", c.acceptance_rate},
            {"accepted", c.accepted},
            {"proposed", c.proposed},
            {"proposal_sigma", c.proposal_sigma},
            {"acceptance_warning", c.acceptance_warning},
            {"n_samples", c.samples.size()},
            {"energy_mean", e.mean},
            {"energy_std_error", e.std_error}};
}

} // namespace lplasma
