#pragma once

// Experiment configuration: flat `key = value` lines, `#` comments, dotted
// section prefixes. Parsing is strict: unknown keys, duplicate keys and
// malformed values are errors.
//
//   experiment            minimize | sample | density | bathtub | verify-separation | verify-theorem
//   seed                  u64 root seed (default 1)
//   output_dir            directory for artifacts (default "out")
//   threads               worker threads (default 1)
//   plasma.n              N, or a comma-separated N grid for verify-* experiments
//   plasma.ell            comma-separated list allowed for verify-* experiments
//   plasma.epsilon        perturbation strength (default 0)
//   plasma.u              perturbing potential descriptor (default zero)
//   factor                correlation factor descriptor (default trivial)
//   minimize.max_iterations, minimize.gradient_tolerance, minimize.restarts,
//   minimize.relocation_moves (true|false), minimize.slack
//   chain.n_steps, chain.burn_in (default 20% of n_steps), chain.thinning,
//   chain.proposal_sigma, chain.n_chains, chain.init (cold|hot),
//   chain.write_samples (true|false)
//   density.bins, density.r_max
//   bathtub.potential, bathtub.density_cap (theorem | conjecture | number),
//   bathtub.h, bathtub.half_width, bathtub.write_grid (true|false)
//   theorem.potential     V for verify-theorem (default radial_power:2)
//   theorem.saturation_tolerance   relative tolerance of the bulk density check (default 0.15)
//
// Potential descriptors: zero | quadratic | quadratic:a,b,c | radial_power:s |
// truncated:cap:<inner descriptor> | grid_file:<path>. A grid file holds
// "x0 y0 h nx ny" followed by nx*ny node values, row-major in y.
//
// Factor descriptors: trivial | pair | pair:power=p;sum_roots=x/y,...;product_roots=x/y,... |
// one_body:roots=x/y,... | one_body:coefficients=x/y,... | composite:<one_body ...>|<pair ...>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lplasma/correlation.hpp"
#include "lplasma/potential.hpp"

namespace lplasma {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind { minimize, sample, density, bathtub, verify_separation, verify_theorem };

inline std::string to_string(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::minimize: return "minimize";
    case ExperimentKind::sample: return "sample";
    case ExperimentKind::density: return "density";
    case ExperimentKind::bathtub: return "bathtub";
    case ExperimentKind::verify_separation: return "verify-separation";
    case ExperimentKind::verify_theorem: return "verify-theorem";
    }
    return "?";
}

inline ExperimentKind parse_experiment_kind(std::string_view s) {
    for (auto k : {ExperimentKind::minimize, ExperimentKind::sample, ExperimentKind::density, ExperimentKind::bathtub,
                   ExperimentKind::verify_separation, ExperimentKind::verify_theorem})
        if (to_string(k) == s) return k;
    throw ConfigError("unknown experiment '" + std::string(s) + "'");
}

namespace config_detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline double parse_double(std::string_view s, std::string_view what) {
    const std::string t = trim(s);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
        throw ConfigError(std::string(what) + ": not a number: '" + t + "'");
    return v;
}

inline std::uint64_t parse_u64(std::string_view s, std::string_view what) {
    const std::string t = trim(s);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
        throw ConfigError(std::string(what) + ": not a non-negative integer: '" + t + "'");
    return v;
}

inline bool parse_bool(std::string_view s, std::string_view what) {
    const std::string t = trim(s);
    if (t == "true") return true;
    if (t == "false") return false;
    throw ConfigError(std::string(what) + ": expected true or false, got '" + t + "'");
}

inline Complex parse_complex(std::string_view s, std::string_view what) {
    const auto parts = split(s, '/');
    if (parts.size() != 2) throw ConfigError(std::string(what) + ": complex numbers are written x/y");
    return {parse_double(parts[0], what), parse_double(parts[1], what)};
}

inline std::vector<Complex> parse_complex_list(std::string_view s, std::string_view what) {
    std::vector<Complex> out;
    if (trim(s).empty()) return out;
    for (const auto& item : split(s, ',')) out.push_back(parse_complex(item, what));
    return out;
}

inline Potential read_grid_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open grid potential file '" + path + "'");
    double x0, y0, h;
    std::size_t nx, ny;
    if (!(in >> x0 >> y0 >> h >> nx >> ny)) throw ConfigError("grid potential file: bad header");
    std::vector<double> values(nx * ny);
    for (auto& v : values)
        if (!(in >> v)) throw ConfigError("grid potential file: expected nx*ny values");
    try {
        return Potential::grid(x0, y0, h, nx, ny, std::move(values));
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

} // namespace config_detail

inline Potential parse_potential(std::string_view desc) {
    using namespace config_detail;
    const std::string d = trim(desc);
    const auto colon = d.find(':');
    const std::string head = d.substr(0, colon);
    const std::string rest = colon == std::string::npos ? std::string{} : d.substr(colon + 1);
    try {
        if (head == "zero" && colon == std::string::npos) return Potential::zero();
        if (head == "quadratic") {
            if (colon == std::string::npos) return Potential::quadratic();
            const auto c = split(rest, ',');
            if (c.size() != 3) throw ConfigError("quadratic:a,b,c needs three coefficients");
            return Potential::quadratic(parse_double(c[0], "quadratic"), parse_double(c[1], "quadratic"),
                                        parse_double(c[2], "quadratic"));
        }
        if (head == "radial_power" && colon != std::string::npos)
            return Potential::radial_power(parse_double(rest, "radial_power"));
        if (head == "truncated" && colon != std::string::npos) {
            const auto c2 = rest.find(':');
            if (c2 == std::string::npos) throw ConfigError("truncated:cap:<inner> expected");
            return truncate_potential(parse_potential(rest.substr(c2 + 1)), parse_double(rest.substr(0, c2), "cap"));
        }
        if (head == "grid_file" && colon != std::string::npos) return read_grid_file(rest);
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("potential '") + d + "': " + e.what());
    }
    throw ConfigError("unknown potential descriptor '" + d + "'");
}

namespace config_detail {

inline std::map<std::string, std::string> parse_fields(std::string_view s) {
    std::map<std::string, std::string> out;
    if (trim(s).empty()) return out;
    for (const auto& item : split(s, ';')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError("factor field '" + item + "' lacks '='");
        out[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
    }
    return out;
}

inline OneBodyPolynomial parse_one_body(std::string_view rest) {
    auto f = parse_fields(rest);
    const bool roots = f.count("roots") > 0, coeffs = f.count("coefficients") > 0;
    if (roots == coeffs) throw ConfigError("one_body needs exactly one of roots= or coefficients=");
    for (const auto& [k, v] : f)
        if (k != "roots" && k != "coefficients" && k != "lead") throw ConfigError("one_body: unknown field '" + k + "'");
    try {
        if (roots)
            return OneBodyPolynomial::from_roots(parse_complex_list(f["roots"], "roots"),
                                                 f.count("lead") ? parse_double(f["lead"], "lead") : 1.0);
        return OneBodyPolynomial::from_coefficients(parse_complex_list(f["coefficients"], "coefficients"));
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

inline PairPolynomial parse_pair(std::string_view rest) {
    auto f = parse_fields(rest);
    for (const auto& [k, v] : f)
        if (k != "power" && k != "sum_roots" && k != "product_roots") throw ConfigError("pair: unknown field '" + k + "'");
    const auto power = f.count("power") ? parse_u64(f["power"], "power") : 1;
    return PairPolynomial(static_cast<unsigned>(power), parse_complex_list(f["sum_roots"], "sum_roots"),
                          parse_complex_list(f["product_roots"], "product_roots"));
}

inline std::pair<std::string, std::string> head_rest(std::string_view desc) {
    const std::string d = trim(desc);
    const auto colon = d.find(':');
    return {d.substr(0, colon), colon == std::string::npos ? std::string{} : d.substr(colon + 1)};
}

} // namespace config_detail

inline FactorPtr parse_factor(std::string_view desc) {
    using namespace config_detail;
    const auto [head, rest] = head_rest(desc);
    if (head == "trivial" && rest.empty()) return trivial_factor();
    if (head == "pair") return std::make_shared<const PairPolynomial>(parse_pair(rest));
    if (head == "one_body") return std::make_shared<const OneBodyPolynomial>(parse_one_body(rest));
    if (head == "composite") {
        const auto bar = rest.find('|');
        if (bar == std::string::npos) throw ConfigError("composite:<one_body ...>|<pair ...> expected");
        const auto [h1, r1] = head_rest(rest.substr(0, bar));
        const auto [h2, r2] = head_rest(rest.substr(bar + 1));
        if (h1 != "one_body" || h2 != "pair") throw ConfigError("composite: expected one_body then pair");
        return std::make_shared<const CompositeFactor>(parse_one_body(r1), parse_pair(r2));
    }
    throw ConfigError("unknown factor descriptor '" + std::string(desc) + "'");
}

/// Validated experiment configuration.
struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::minimize;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    std::size_t threads = 1;

    std::vector<std::size_t> n_values{10};
    std::vector<unsigned> ell_values{2};
    double epsilon = 0.0;
    std::string u_desc = "zero";
    Potential u = Potential::zero();
    std::string factor_desc = "trivial";
    FactorPtr factor = trivial_factor();

    std::size_t max_iterations = 200000;
    std::optional<double> gradient_tolerance;
    std::size_t restarts = 8;
    bool relocation_moves = true;
    double slack = 1e-2;

    std::size_t n_steps = 20000;
    std::optional<std::size_t> burn_in;
    std::size_t thinning = 10;
    std::optional<double> proposal_sigma;
    std::size_t n_chains = 1;
    bool hot_start = false;
    bool write_samples = false;

    std::size_t bins = 40;
    std::optional<double> r_max;

    std::string bathtub_potential_desc = "radial_power:2";
    Potential bathtub_potential = Potential::radial_power(2.0);
    std::string density_cap = "theorem";
    double bathtub_h = 0.01;
    std::optional<double> bathtub_half_width;
    bool write_grid = false;

    std::string theorem_potential_desc = "radial_power:2";
    Potential theorem_potential = Potential::radial_power(2.0);
    double saturation_tolerance = 0.15;

    /// Canonical key/value dump, parseable back into the same configuration.
    std::map<std::string, std::string> entries;

    [[nodiscard]] std::size_t burn_in_steps() const { return burn_in ? *burn_in : n_steps / 5; }

    /// max_density from density_cap for a given l: theorem -> 4/(pi l), conjecture -> 1/(pi l).
    [[nodiscard]] double bathtub_cap(unsigned ell) const {
        if (density_cap == "theorem") return 4.0 / (kPi * ell);
        if (density_cap == "conjecture") return 1.0 / (kPi * ell);
        return config_detail::parse_double(density_cap, "bathtub.density_cap");
    }

    [[nodiscard]] std::string dump() const {
        std::ostringstream os;
        for (const auto& [k, v] : entries) os << k << " = " << v << "\n";
        return os.str();
    }
};

inline const std::set<std::string>& known_config_keys() {
    static const std::set<std::string> keys{
        "experiment",         "seed",
        "output_dir",         "threads",
        "plasma.n",           "plasma.ell",
        "plasma.epsilon",     "plasma.u",
        "factor",             "minimize.max_iterations",
        "minimize.gradient_tolerance", "minimize.restarts",
        "minimize.relocation_moves",   "minimize.slack",
        "chain.n_steps",      "chain.burn_in",
        "chain.thinning",     "chain.proposal_sigma",
        "chain.n_chains",     "chain.init",
        "chain.write_samples", "density.bins",
        "density.r_max",      "bathtub.potential",
        "bathtub.density_cap", "bathtub.h",
        "bathtub.half_width", "bathtub.write_grid",
        "theorem.potential",  "theorem.saturation_tolerance"};
    return keys;
}

inline std::map<std::string, std::string> parse_config_entries(std::string_view text) {
    using namespace config_detail;
    std::map<std::string, std::string> entries;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        const std::string body = trim(std::string_view(line).substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (!known_config_keys().count(key))
            throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (entries.count(key)) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        if (value.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty value for '" + key + "'");
        entries[key] = value;
    }
    return entries;
}

/// Builds and validates a configuration. `entries` may come from a file or
/// be assembled programmatically; command-line overrides are applied by the caller.
inline ExperimentConfig build_config(std::map<std::string, std::string> entries) {
    using namespace config_detail;
    for (const auto& [k, v] : entries)
        if (!known_config_keys().count(k)) throw ConfigError("unknown key '" + k + "'");
    ExperimentConfig c;
    auto get = [&](const std::string& k) -> std::optional<std::string> {
        auto it = entries.find(k);
        if (it == entries.end()) return std::nullopt;
        return it->second;
    };
    if (!get("experiment")) throw ConfigError("missing key 'experiment'");
    c.experiment = parse_experiment_kind(*get("experiment"));
    if (auto v = get("seed")) c.seed = parse_u64(*v, "seed");
    if (auto v = get("output_dir")) c.output_dir = *v;
    if (auto v = get("threads")) c.threads = parse_u64(*v, "threads");
    if (c.threads < 1) throw ConfigError("threads must be >= 1");

    const bool verify =
        c.experiment == ExperimentKind::verify_separation || c.experiment == ExperimentKind::verify_theorem;
    if (auto v = get("plasma.n")) {
        c.n_values.clear();
        for (const auto& item : split(*v, ',')) c.n_values.push_back(parse_u64(item, "plasma.n"));
    }
    if (auto v = get("plasma.ell")) {
        c.ell_values.clear();
        for (const auto& item : split(*v, ',')) c.ell_values.push_back(static_cast<unsigned>(parse_u64(item, "plasma.ell")));
    }
    if (!verify && (c.n_values.size() != 1 || c.ell_values.size() != 1))
        throw ConfigError("plasma.n and plasma.ell lists are only allowed for verify-* experiments");
    for (auto n : c.n_values)
        if (n < 1) throw ConfigError("plasma.n must be >= 1");
    for (auto l : c.ell_values)
        if (l < 1) throw ConfigError("plasma.ell must be >= 1");
    if (auto v = get("plasma.epsilon")) c.epsilon = parse_double(*v, "plasma.epsilon");
    if (!(c.epsilon >= 0.0)) throw ConfigError("plasma.epsilon must be >= 0");
    if (auto v = get("plasma.u")) {
        c.u_desc = *v;
        c.u = parse_potential(*v);
    }
    if (auto v = get("factor")) {
        c.factor_desc = *v;
        c.factor = parse_factor(*v);
    }

    if (auto v = get("minimize.max_iterations")) c.max_iterations = parse_u64(*v, "minimize.max_iterations");
    if (c.max_iterations < 1) throw ConfigError("minimize.max_iterations must be >= 1");
    if (auto v = get("minimize.gradient_tolerance")) {
        c.gradient_tolerance = parse_double(*v, "minimize.gradient_tolerance");
        if (!(*c.gradient_tolerance > 0.0)) throw ConfigError("minimize.gradient_tolerance must be > 0");
    }
    if (auto v = get("minimize.restarts")) c.restarts = parse_u64(*v, "minimize.restarts");
    if (c.restarts < 1) throw ConfigError("minimize.restarts must be >= 1");
    if (auto v = get("minimize.relocation_moves")) c.relocation_moves = parse_bool(*v, "minimize.relocation_moves");
    if (auto v = get("minimize.slack")) c.slack = parse_double(*v, "minimize.slack");
    if (!(c.slack >= 0.0 && c.slack < 1.0)) throw ConfigError("minimize.slack must be in [0, 1)");

    if (auto v = get("chain.n_steps")) c.n_steps = parse_u64(*v, "chain.n_steps");
    if (auto v = get("chain.burn_in")) c.burn_in = parse_u64(*v, "chain.burn_in");
    if (!(c.n_steps > c.burn_in_steps())) throw ConfigError("chain.n_steps must exceed chain.burn_in");
    if (auto v = get("chain.thinning")) c.thinning = parse_u64(*v, "chain.thinning");
    if (c.thinning < 1) throw ConfigError("chain.thinning must be >= 1");
    if (auto v = get("chain.proposal_sigma")) {
        c.proposal_sigma = parse_double(*v, "chain.proposal_sigma");
        if (!(*c.proposal_sigma > 0.0)) throw ConfigError("chain.proposal_sigma must be > 0");
    }
    if (auto v = get("chain.n_chains")) c.n_chains = parse_u64(*v, "chain.n_chains");
    if (c.n_chains < 1) throw ConfigError("chain.n_chains must be >= 1");
    if (auto v = get("chain.init")) {
        if (*v == "hot") c.hot_start = true;
        else if (*v == "cold") c.hot_start = false;
        else throw ConfigError("chain.init must be cold or hot");
    }
    if (auto v = get("chain.write_samples")) c.write_samples = parse_bool(*v, "chain.write_samples");

    if (auto v = get("density.bins")) c.bins = parse_u64(*v, "density.bins");
    if (c.bins < 1) throw ConfigError("density.bins must be >= 1");
    if (auto v = get("density.r_max")) {
        c.r_max = parse_double(*v, "density.r_max");
        if (!(*c.r_max > 0.0)) throw ConfigError("density.r_max must be > 0");
    }

    if (auto v = get("bathtub.potential")) {
        c.bathtub_potential_desc = *v;
        c.bathtub_potential = parse_potential(*v);
    }
    if (auto v = get("bathtub.density_cap")) c.density_cap = *v;
    if (c.density_cap != "theorem" && c.density_cap != "conjecture" &&
        !(parse_double(c.density_cap, "bathtub.density_cap") > 0.0))
        throw ConfigError("bathtub.density_cap must be theorem, conjecture or a positive number");
    if (auto v = get("bathtub.h")) c.bathtub_h = parse_double(*v, "bathtub.h");
    if (!(c.bathtub_h > 0.0)) throw ConfigError("bathtub.h must be > 0");
    if (auto v = get("bathtub.half_width")) {
        c.bathtub_half_width = parse_double(*v, "bathtub.half_width");
        if (!(*c.bathtub_half_width > 0.0)) throw ConfigError("bathtub.half_width must be > 0");
    }
    if (auto v = get("bathtub.write_grid")) c.write_grid = parse_bool(*v, "bathtub.write_grid");

    if (auto v = get("theorem.potential")) {
        c.theorem_potential_desc = *v;
        c.theorem_potential = parse_potential(*v);
    }
    if (auto v = get("theorem.saturation_tolerance")) c.saturation_tolerance = parse_double(*v, "theorem.saturation_tolerance");
    if (!(c.saturation_tolerance > 0.0)) throw ConfigError("theorem.saturation_tolerance must be > 0");

    c.entries = std::move(entries);
    return c;
}

inline ExperimentConfig parse_config(std::string_view text) { return build_config(parse_config_entries(text)); }

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace lplasma
