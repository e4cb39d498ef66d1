// cars: command-line front end for the Fisher-information library.

#include <exception>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cars/cli/commands.hpp"
#include "cars/montecarlo.hpp"
#include "cars/numerics/quadrature.hpp"
#include "cars/numerics/series.hpp"

namespace {

using namespace cars::cli;

using Command = CommandOutput (*)(const RunConfig&);

int run(int argc, char** argv) {
    CLI::App app{"Quantum and classical Fisher information for CARS imaging of two point emitters", "cars"};
    app.set_version_flag("--version", cars::kVersion);
    app.require_subcommand(1, 1);

    std::string config_path;
    std::optional<std::string> out, format, seed, modes, tol;
    std::vector<std::string> sets;
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--out", out, "output path (default: stdout)");
    app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--seed", seed, "random seed (simulate)");
    app.add_option("--modes", modes, "SPADE truncation M");
    app.add_option("--tol", tol, "absolute direct-imaging quadrature tolerance (normalized units)");
    app.add_option("--set", sets, "extra key=value override, repeatable");

    const std::map<std::string, std::pair<Command, std::string>> commands{
        {"figure2", {cmd_figure2, "plane-wave QFI / direct imaging / SPADE vs separation"}},
        {"figure3", {cmd_figure3, "vortex excitation sweep over row offset psi, with waist envelope"}},
        {"convergence", {cmd_convergence, "SPADE FI vs truncation M"}},
        {"adjudicate", {cmd_adjudicate, "compare closed forms with independent oracles (JSON)"}},
        {"simulate", {cmd_simulate, "Monte Carlo maximum-likelihood campaign vs the Cramer-Rao bound"}},
        {"spectral-dump", {cmd_spectral_dump, "normalized anti-Stokes spectral mode"}},
        {"optimize-waist", {cmd_optimize_waist, "optimal Stokes waist ratio per separation"}},
    };
    for (const auto& [name, entry] : commands) app.add_subcommand(name, entry.second)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        RunConfig cfg;
        if (!config_path.empty()) load_file(cfg, config_path);
        load_environment(cfg);
        if (out) apply(cfg, "out", *out);
        if (format) apply(cfg, "format", *format);
        if (seed) apply(cfg, "seed", *seed);
        if (modes) apply(cfg, "modes", *modes);
        if (tol) apply(cfg, "tol", *tol);
        for (const auto& kv : sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
            apply(cfg, kv.substr(0, eq), kv.substr(eq + 1));
        }
        validate(cfg);

        const auto result = commands.at(name).first(cfg);
        write_output(result.text, cfg.out);
        if (!result.diagnostic.empty()) std::cerr << "cars " << name << ": " << result.diagnostic << "\n";
        return result.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "cars " << name << ": " << e.what() << "\n";
        return kExitConfig;
    } catch (const cars::NonIdentifiableError& e) {
        std::cerr << "cars " << name << ": " << e.what() << "\n";
        return kExitConfig;
    } catch (const cars::numerics::QuadratureError& e) {
        std::cerr << "cars " << name << ": non-convergence: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const cars::numerics::SeriesError& e) {
        std::cerr << "cars " << name << ": non-convergence: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const NumericError& e) {
        std::cerr << "cars " << name << ": " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::invalid_argument& e) {
        std::cerr << "cars " << name << ": invalid configuration: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::domain_error& e) {
        std::cerr << "cars " << name << ": invalid configuration: " << e.what() << "\n";
        return kExitConfig;
    }
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "cars: internal error: " << e.what() << "\n";
        return 1;
    }
}
