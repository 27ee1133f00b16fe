#pragma once

// Command-line front end. Subcommands mirror ExperimentKind; the shared
// flags --config, --seed, --out and --threads override the config file.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lplasma/config.hpp"
#include "lplasma/experiment.hpp"

namespace lplasma {

struct CliOverrides {
    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> threads;
};

/// Reads the config file (if any) and applies the overrides. The resolved
/// entries always carry experiment, seed, output_dir and threads.
inline ExperimentConfig resolve_config(ExperimentKind kind, const CliOverrides& o) {
    std::map<std::string, std::string> entries;
    if (o.config_path) {
        std::ifstream in(*o.config_path);
        if (!in) throw ConfigError("cannot open config file '" + *o.config_path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        entries = parse_config_entries(ss.str());
    }
    const std::string name = to_string(kind);
    if (auto it = entries.find("experiment"); it != entries.end() && it->second != name)
        throw ConfigError("config declares experiment '" + it->second + "' but subcommand is '" + name + "'");
    entries["experiment"] = name;
    if (o.seed) entries["seed"] = std::to_string(*o.seed);
    if (o.out) entries["output_dir"] = *o.out;
    if (o.threads) entries["threads"] = std::to_string(*o.threads);
    entries.try_emplace("seed", "1");
    entries.try_emplace("output_dir", "out");
    entries.try_emplace("threads", "1");
    return build_config(std::move(entries));
}

/// Full CLI; returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& log = std::cout) {
    CLI::App app{"l-plasma ground states, Gibbs sampling and bathtub bounds"};
    app.require_subcommand(1);
    CliOverrides o;
    const std::vector<ExperimentKind> kinds{ExperimentKind::minimize,          ExperimentKind::sample,
                                            ExperimentKind::density,           ExperimentKind::bathtub,
                                            ExperimentKind::verify_separation, ExperimentKind::verify_theorem};
    std::map<CLI::App*, ExperimentKind> by_app;
    for (auto k : kinds) {
        auto* sub = app.add_subcommand(to_string(k));
        sub->add_option("--config", o.config_path, "key = value config file");
        sub->add_option("--seed", o.seed, "root RNG seed");
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
        by_app[sub] = k;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }
    ExperimentKind kind = ExperimentKind::minimize;
    for (auto& [sub, k] : by_app)
        if (sub->parsed()) kind = k;
    ExperimentConfig cfg;
    try {
        cfg = resolve_config(kind, o);
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const InvalidArgument& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    return run_experiment_safely(cfg, log);
}

} // namespace lplasma
