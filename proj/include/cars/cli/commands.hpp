#pragma once

// Subcommand implementations. Each returns the rendered document and an exit code;
// tools/cars.cpp only parses arguments and writes the text.

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "cars/adjudication.hpp"
#include "cars/cli/config.hpp"
#include "cars/cli/output.hpp"
#include "cars/excitation.hpp"
#include "cars/fisher.hpp"
#include "cars/montecarlo.hpp"
#include "cars/parallel.hpp"
#include "cars/psf_modes.hpp"
#include "cars/spectral.hpp"
#include "cars/version.hpp"

namespace cars::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitMismatch = 4;

struct CommandOutput {
    std::string text;
    int exit_code = kExitOk;
    std::string diagnostic;  // printed to stderr when nonempty
};

inline CommandOutput success(std::string text) {
    CommandOutput out;
    out.text = std::move(text);
    return out;
}

namespace detail {

inline unsigned workers(const RunConfig& c) { return c.workers > 0 ? static_cast<unsigned>(c.workers) : default_workers(); }

inline std::string require_family(const RunConfig& c, const std::string& own, const std::string& command) {
    if (!c.family.empty() && c.family != own)
        throw ConfigError(command + " requires family = " + own + " (got '" + c.family + "')");
    return own;
}

inline Metadata header(const std::string& command, RunConfig c, const std::string& family) {
    c.family = family;
    Metadata m{{"tool", "cars"}, {"version", kVersion}, {"schema", kSchemaVersion}, {"command", command}};
    for (auto& kv : describe(c)) m.push_back(std::move(kv));
    m.emplace_back("units", "normalized w^2 F / (2 kappa g^2), w = 1");
    return m;
}

inline DirectImagingTolerance di_tolerance(const RunConfig& c) {
    DirectImagingTolerance t;
    t.abs_tol = c.tol;
    return t;
}

// One row of the three information measures at a configuration.
struct Measures {
    FisherReport qfi, di, spade;
};

inline Measures measures(const Excitation& exc, double s, int modes, const RunConfig& c) {
    const GaussianPsf psf;
    const HermiteGaussBasis basis(modes);
    const auto in = fisher_inputs(exc, EmitterScene{s, 0.0, 1.0, 1.0}, psf);
    return {qfi_separation(in.amps, in.geom), fi_direct(in.amps, psf, in.geom, di_tolerance(c)),
            fi_spade(in.amps, basis, in.geom, modes)};
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline Table figure2_table(const RunConfig& c) {
    const auto family = detail::require_family(c, "plane", "figure2");
    const auto s_grid = c.s_grid();
    struct Key {
        double k, s;
    };
    std::vector<Key> keys;
    for (double k : c.ktilde)
        for (double s : s_grid) keys.push_back({k, s});

    Table t;
    t.meta = detail::header("figure2", c, family);
    if (c.ktilde_default)
        t.meta.emplace_back("ktilde_note", "default grid {0,1,2,4} is a choice: the figure legend values are not stated");
    t.columns = {"s", "ktilde", "qfi", "fi_di", "fi_spade_M", "M"};
    if (c.raw) t.columns.insert(t.columns.end(), {"qfi_raw", "fi_di_raw", "fi_spade_M_raw"});
    t.rows = parallel_map<std::vector<double>>(
        keys.size(),
        [&](std::size_t i) {
            const auto m = detail::measures(PlaneWaveExcitation::from_ktilde(keys[i].k), keys[i].s, c.modes, c);
            std::vector<double> row{keys[i].s, keys[i].k, m.qfi.normalized_value, m.di.normalized_value,
                                    m.spade.normalized_value, static_cast<double>(c.modes)};
            if (c.raw) row.insert(row.end(), {m.qfi.value, m.di.value, m.spade.value});
            return row;
        },
        detail::workers(c));
    return t;
}

/// Vortex sweep. qfi_opt/a_opt are the optimum over the Stokes waist ratio at the row's own ψ
/// (for ψ = 0 this is the optimized envelope).
inline Table figure3_table(const RunConfig& c) {
    const auto family = detail::require_family(c, "vortex", "figure3");
    const auto s_grid = c.s_grid();
    struct Key {
        double psi, a, s;
    };
    std::vector<Key> keys;
    for (double psi : c.psi)
        for (double a : c.a)
            for (double s : s_grid) keys.push_back({psi, a, s});

    Table t;
    t.meta = detail::header("figure3", c, family);
    t.meta.emplace_back("envelope", "qfi_opt = max over a in [a_min, a_max] of qfi at the row's psi; a_opt its argmax");
    t.columns = {"s", "psi", "a", "qfi", "fi_di", "fi_spade_M", "di_over_qfi", "qfi_opt", "a_opt"};
    if (c.raw) t.columns.insert(t.columns.end(), {"qfi_raw", "fi_di_raw", "fi_spade_M_raw"});
    t.rows = parallel_map<std::vector<double>>(
        keys.size(),
        [&](std::size_t i) {
            const auto& k = keys[i];
            const auto m = detail::measures(VortexExcitation{k.a, k.psi}, k.s, c.modes, c);
            const double q = m.qfi.normalized_value;
            // QFI vanishes only at s = 0, where every measure is 0: report the ratio as 1
            const double ratio = q > 0.0 ? m.di.normalized_value / q : 1.0;
            const auto opt = optimize_waist(k.psi, {k.s}, c.a_min, c.a_max).front();
            std::vector<double> row{k.s, k.psi, k.a, q, m.di.normalized_value, m.spade.normalized_value, ratio,
                                    opt.qfi, opt.a};
            if (c.raw) row.insert(row.end(), {m.qfi.value, m.di.value, m.spade.value});
            return row;
        },
        detail::workers(c));
    return t;
}

inline Table convergence_table(const RunConfig& c) {
    const auto family = detail::require_family(c, "plane", "convergence");
    const std::vector<double> ks = c.ktilde_default ? std::vector<double>{2.0} : c.ktilde;
    const auto s_grid = c.s_grid();
    struct Key {
        double k, s;
        int m;
    };
    std::vector<Key> keys;
    for (double k : ks)
        for (double s : s_grid)
            for (int m : c.modes_list) keys.push_back({k, s, m});

    Table t;
    RunConfig shown = c;
    shown.ktilde = ks;
    t.meta = detail::header("convergence", shown, family);
    t.columns = {"s", "ktilde", "M", "fi_spade", "qfi", "ratio"};
    const GaussianPsf psf;
    t.rows = parallel_map<std::vector<double>>(
        keys.size(),
        [&](std::size_t i) {
            const auto& k = keys[i];
            const HermiteGaussBasis basis(k.m);
            const auto in = fisher_inputs(PlaneWaveExcitation::from_ktilde(k.k), EmitterScene{k.s, 0.0, 1.0, 1.0}, psf);
            const double f = fi_spade(in.amps, basis, in.geom, k.m).normalized_value;
            const double q = qfi_separation(in.amps, in.geom).normalized_value;
            return std::vector<double>{k.s, k.k, static_cast<double>(k.m), f, q, q > 0.0 ? f / q : 1.0};
        },
        detail::workers(c));
    return t;
}

inline Table optimize_waist_table(const RunConfig& c) {
    const auto family = detail::require_family(c, "vortex", "optimize-waist");
    const auto s_grid = c.s_grid();
    struct Key {
        double psi, s;
    };
    std::vector<Key> keys;
    for (double psi : c.psi)
        for (double s : s_grid) keys.push_back({psi, s});
    const double a_ref = c.a.front();

    Table t;
    t.meta = detail::header("optimize-waist", c, family);
    t.columns = {"psi", "s", "a_opt", "qfi_opt", "a_ref", "qfi_ref"};
    t.rows = parallel_map<std::vector<double>>(
        keys.size(),
        [&](std::size_t i) {
            const auto opt = optimize_waist(keys[i].psi, {keys[i].s}, c.a_min, c.a_max).front();
            return std::vector<double>{keys[i].psi, keys[i].s, opt.a, opt.qfi, a_ref,
                                       qfi_vortex_general_normalized(a_ref, keys[i].psi, keys[i].s)};
        },
        detail::workers(c));
    return t;
}

inline Table spectral_table(const RunConfig& c) {
    const RamanResonance res{c.omega_vib, c.gamma_vib, c.polarizability};
    const PulseSpectrum pump(c.pump_center, c.pump_bandwidth, c.pump_amplitude);
    const PulseSpectrum stokes(c.stokes_center, c.stokes_bandwidth, c.stokes_amplitude);
    const auto spec = normalize_phi(res, pump, stokes, static_cast<std::size_t>(c.grid_points));
    Table t;
    t.meta = detail::header("spectral-dump", c, c.family);
    t.meta.emplace_back("g", format_number(spec.g));
    t.columns = {"omega", "re_phi", "im_phi", "abs_phi"};
    t.rows.reserve(spec.omega.size());
    for (std::size_t i = 0; i < spec.omega.size(); ++i)
        t.rows.push_back({spec.omega[i], spec.phi[i].real(), spec.phi[i].imag(), std::abs(spec.phi[i])});
    return t;
}

// ---------------------------------------------------------------------------

inline CommandOutput cmd_figure2(const RunConfig& c) { return success(render(figure2_table(c), c.format)); }
inline CommandOutput cmd_figure3(const RunConfig& c) { return success(render(figure3_table(c), c.format)); }
inline CommandOutput cmd_convergence(const RunConfig& c) { return success(render(convergence_table(c), c.format)); }
inline CommandOutput cmd_optimize_waist(const RunConfig& c) { return success(render(optimize_waist_table(c), c.format)); }
inline CommandOutput cmd_spectral_dump(const RunConfig& c) { return success(render(spectral_table(c), c.format)); }

inline nlohmann::ordered_json adjudication_json(const AdjudicationReport& rep, const RunConfig& c) {
    nlohmann::ordered_json j;
    j["meta"] = meta_json(detail::header("adjudicate", c, c.family));
    auto checks = nlohmann::ordered_json::array();
    for (const auto& k : rep.checks) {
        nlohmann::ordered_json e;
        e["name"] = k.name;
        e["role"] = k.shipped ? "shipped" : "rejected_variant";
        e["form"] = k.note;
        e["oracle"] = k.oracle;
        e["grid"] = k.grid;
        e["points"] = k.points;
        e["tolerance"] = k.tolerance;
        e["max_abs_deviation"] = k.max_abs_deviation;
        e["max_scaled_deviation"] = k.max_scaled_deviation;
        e["worst_case"] = {{"formula", k.worst_formula_value}, {"oracle", k.worst_oracle_value}};
        e["matches"] = k.matches;
        checks.push_back(std::move(e));
    }
    j["checks"] = std::move(checks);
    j["vortex_qfi"] = {{"selected", rep.vortex_selected}, {"exactly_one_form_matches", rep.exactly_one_vortex_form}};
    j["resolved_signs"] = {
        {"eta_minus2", "positive: (sinh u - u)/(8 sinh^2(u/2))"},
        {"beta", "e^{-s^2/2}(1 - s^2)/w^2"},
        {"vortex_qfi_bracket", rep.vortex_selected == "vortex_qfi_shifted_form" ? "minus" : "unresolved"}};
    const auto failures = rep.failures();
    j["status"] = failures.empty() ? "ok" : "mismatch";
    j["failures"] = failures;
    return j;
}

/// Always JSON. Exit 4 names the offending shipped forms.
inline CommandOutput cmd_adjudicate(const RunConfig& c) {
    const auto rep = adjudicate();
    auto out = success(adjudication_json(rep, c).dump(2) + "\n");
    if (!rep.ok()) {
        out.exit_code = kExitMismatch;
        out.diagnostic = "adjudication mismatch:";
        for (const auto& f : rep.failures()) out.diagnostic += " " + f;
    }
    return out;
}

inline CampaignConfig campaign_config(const RunConfig& c) {
    const std::string family = c.family.empty() ? "vortex" : c.family;
    CampaignConfig cc;
    cc.measurement = c.measurement == "direct" ? Measurement::direct_imaging : Measurement::spade;
    if (family == "vortex")
        cc.tpl.excitation = VortexExcitation{c.a.front(), c.psi.front()};
    else
        cc.tpl.excitation = PlaneWaveExcitation::from_ktilde(c.ktilde.front());
    cc.tpl.scene = EmitterScene{c.s, 0.0, 1.0, 1.0};
    cc.photons_per_shot = c.photons;
    cc.mu = c.mu;
    cc.batches = c.batches;
    cc.estimates_per_batch = c.estimates_per_batch;
    cc.modes = c.modes;
    cc.bins = c.bins;
    cc.seed = c.seed;
    return cc;
}

inline nlohmann::ordered_json estimation_json(const EstimationReport& r) {
    nlohmann::ordered_json j;
    j["measurement"] = r.measurement;
    j["true_s"] = r.true_s;
    j["seed"] = r.seed;
    j["mu"] = r.mu;
    j["photons_per_shot"] = r.photons_per_shot;
    j["g"] = r.g;
    j["batches"] = r.batches;
    j["estimates_per_batch"] = r.estimates_per_batch;
    j["fisher"] = r.fisher;
    if (r.measurement != "spade") {
        j["fisher_continuum"] = r.fisher_continuum;
        j["bins"] = r.bins;
    }
    j["crb"] = r.crb;
    j["mean_estimate"] = r.mean_estimate;
    j["empirical_variance"] = r.empirical_variance;
    j["ratio"] = r.ratio;
    j["batch_variances"] = r.batch_variances;
    j["estimates"] = r.estimates;
    return j;
}

/// JSON: full report. CSV: one row per estimate, summary in the header.
inline CommandOutput cmd_simulate(const RunConfig& c) {
    const std::string family = c.family.empty() ? "vortex" : c.family;
    const auto rep = run_campaign(campaign_config(c), detail::workers(c));
    const auto meta = detail::header("simulate", c, family);
    if (c.format == Format::json) {
        nlohmann::ordered_json j;
        j["meta"] = meta_json(meta);
        j["report"] = estimation_json(rep);
        return success(j.dump(2) + "\n");
    }
    Table t;
    t.meta = meta;
    for (const auto& [k, v] : std::vector<std::pair<std::string, double>>{{"fisher", rep.fisher},
                                                                          {"crb", rep.crb},
                                                                          {"empirical_variance", rep.empirical_variance},
                                                                          {"ratio", rep.ratio},
                                                                          {"mean_estimate", rep.mean_estimate}})
        t.meta.emplace_back(k, format_number(v));
    t.columns = {"batch", "index", "estimate"};
    const auto per = static_cast<std::size_t>(rep.estimates_per_batch);
    for (std::size_t i = 0; i < rep.estimates.size(); ++i)
        t.rows.push_back({static_cast<double>(i / per), static_cast<double>(i % per), rep.estimates[i]});
    return success(to_csv(t));
}

}  // namespace cars::cli
