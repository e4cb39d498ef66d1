#pragma once

// Compares every shipped closed form (and the published variants it replaced) with an
// independent oracle over a parameter grid.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "cars/excitation.hpp"
#include "cars/fisher.hpp"
#include "cars/numerics/optimize.hpp"
#include "cars/oracles.hpp"
#include "cars/psf_modes.hpp"

namespace cars {

struct FormulaCheck {
    std::string name;
    bool shipped = true;  // false: published variant kept only for comparison
    std::string oracle;
    std::string grid;
    double tolerance = 0.0;
    double max_abs_deviation = 0.0;
    double max_scaled_deviation = 0.0;  // |f - oracle| / max(1, |oracle|)
    double worst_oracle_value = 0.0;
    double worst_formula_value = 0.0;
    int points = 0;
    bool matches = false;
    std::string note;
};

struct AdjudicationReport {
    std::vector<FormulaCheck> checks;
    std::string vortex_selected;
    bool exactly_one_vortex_form = false;

    [[nodiscard]] std::vector<std::string> failures() const {
        std::vector<std::string> out;
        for (const auto& c : checks)
            if (c.shipped && !c.matches) out.push_back(c.name);
        if (!exactly_one_vortex_form) out.push_back("vortex_qfi_selection");
        return out;
    }
    [[nodiscard]] bool ok() const { return failures().empty(); }
    [[nodiscard]] const FormulaCheck* find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }
};

namespace detail {

// Accumulates formula-vs-oracle pairs into a check.
struct CheckBuilder {
    FormulaCheck c;
    void add(double formula, double oracle) {
        const double abs_dev = std::abs(formula - oracle);
        const double scaled = std::isfinite(abs_dev) ? abs_dev / std::max(1.0, std::abs(oracle))
                                                     : std::numeric_limits<double>::infinity();
        if (c.points == 0 || scaled > c.max_scaled_deviation) {
            c.max_scaled_deviation = scaled;
            c.worst_oracle_value = oracle;
            c.worst_formula_value = formula;
        }
        c.max_abs_deviation = std::max(c.max_abs_deviation, abs_dev);
        ++c.points;
    }
    FormulaCheck finish() {
        c.matches = c.max_scaled_deviation <= c.tolerance;
        return c;
    }
};

inline CheckBuilder check(std::string name, bool shipped, std::string oracle, std::string grid, double tol,
                          std::string note = {}) {
    CheckBuilder b;
    b.c.name = std::move(name);
    b.c.shipped = shipped;
    b.c.oracle = std::move(oracle);
    b.c.grid = std::move(grid);
    b.c.tolerance = tol;
    b.c.note = std::move(note);
    return b;
}

}  // namespace detail

inline AdjudicationReport adjudicate() {
    const GaussianPsf psf;
    AdjudicationReport rep;

    // plane-wave QFI
    {
        auto b = detail::check("plane_qfi_closed", true, "qfi_general (amplitude path)",
                               "ktilde in {0,1,2,4} x s in linspace(0.01,3,120)", 1e-10);
        for (double k : {0.0, 1.0, 2.0, 4.0})
            for (double s : numerics::linspace(0.01, 3.0, 120)) {
                const auto in = fisher_inputs(PlaneWaveExcitation::from_ktilde(k), EmitterScene{s, 0.0, 1.0, 1.0}, psf);
                b.add(qfi_plane_normalized(k, s), qfi_separation(in.amps, in.geom).normalized_value);
            }
        rep.checks.push_back(b.finish());
    }

    // vortex QFI: both published forms against the general path
    {
        const std::string grid = "a in {0.5, sqrt(2)/2, 1} x psi in {0, 0.2} x s in linspace(0.05,3,60)";
        auto shifted = detail::check("vortex_qfi_shifted_form", true, "qfi_general (amplitude path)", grid, 1e-9,
                                     "psi-dependent form with leading 4a^4(1+psi^2) and '- e^{-s^2/2}[...]' bracket");
        auto centered = detail::check("vortex_qfi_centered_form", false, "qfi_general (amplitude path)", grid, 1e-9,
                                      "psi = 0 form with constant 4a^2 and '+ e^{-s^2/2}(...)' bracket");
        for (double a : {0.5, std::sqrt(0.5), 1.0})
            for (double psi : {0.0, 0.2})
                for (double s : numerics::linspace(0.05, 3.0, 60)) {
                    const double oracle = qfi_vortex_general_normalized(a, psi, s);
                    shifted.add(qfi_vortex_normalized(a, psi, s), oracle);
                    centered.add(candidate_forms::qfi_vortex_centered_normalized(a, s), oracle);
                }
        rep.checks.push_back(shifted.finish());
        rep.checks.push_back(centered.finish());
        const bool a_ok = rep.checks[rep.checks.size() - 2].matches;
        const bool b_ok = rep.checks.back().matches;
        rep.exactly_one_vortex_form = a_ok != b_ok;
        rep.vortex_selected = a_ok && !b_ok   ? "vortex_qfi_shifted_form"
                              : b_ok && !a_ok ? "vortex_qfi_centered_form"
                                              : "none";
        // the shipped closed form is the shifted one; it must be the selected one
        if (rep.vortex_selected != "vortex_qfi_shifted_form") rep.exactly_one_vortex_form = false;
    }

    // PSF scalars against derivative-mode quadrature
    {
        const std::vector<double> s_grid{0.25, 0.5, 1.0, 1.5, 2.0, 3.0};
        const std::string grid = "s in {0.25,0.5,1,1.5,2,3}, w = 1";
        const std::string oracle = "2D quadrature of derivative modes";
        auto eta_p = detail::check("eta_plus2_closed", true, oracle, grid, 1e-7,
                                   "(sinh u + u)/(8 cosh^2(u/2)), u = s^2/2");
        auto eta_m = detail::check("eta_minus2_closed", true, oracle, grid, 1e-7,
                                   "(sinh u - u)/(8 sinh^2(u/2)), u = s^2/2; positive for all s > 0");
        auto eta_p_lit = detail::check("eta_plus2_printed_gaussian", false, oracle, grid, 1e-7,
                                       "(s^2 + sinh(s^2/2))/(4(e^{s^2/4}+e^{-s^2/4})^2)");
        auto eta_m_lit = detail::check("eta_minus2_printed_gaussian", false, oracle, grid, 1e-7,
                                       "-(s^2 - sinh(s^2/2))/(4(e^{s^2/4}-e^{-s^2/4})^2); negative for s below ~1.6");
        auto eta_p_d2 = detail::check("eta_plus2_denominator_1_plus_delta_squared", false, oracle, grid, 1e-7,
                                      "correction term divided by 4(1+delta^2) instead of 4(1+delta)^2");
        auto eta_m_d2 = detail::check("eta_minus2_denominator_1_minus_delta_squared", false, oracle, grid, 1e-7,
                                      "correction term divided by 4(1-delta^2) instead of 4(1-delta)^2");
        auto xi_p = detail::check("xi_plus2_closed", true, oracle, grid, 1e-7, "1 - s^2/(2 sinh(s^2/2))");
        auto xi_m = detail::check("xi_minus2_closed", true, oracle, grid, 1e-7, "1 + s^2/(2 sinh(s^2/2))");
        auto beta = detail::check("beta_closed", true, "2D quadrature of the defining integral", grid, 1e-7,
                                  "e^{-s^2/2}(1 - s^2)/w^2");
        auto beta_printed = detail::check("beta_printed_sign", false, "2D quadrature of the defining integral", grid,
                                          1e-7, "e^{-s^2/2}(s^2 - 1)/w^2: opposite sign except at s = 1");
        for (double s : s_grid) {
            const auto g = psf_geometry(psf, s);
            const auto o = oracles::mode_norms(psf, s);
            eta_p.add(g.eta_plus2, o.eta_plus2);
            eta_m.add(g.eta_minus2, o.eta_minus2);
            eta_p_lit.add(candidate_forms::eta_plus2_literal(s), o.eta_plus2);
            eta_m_lit.add(candidate_forms::eta_minus2_literal(s), o.eta_minus2);
            eta_p_d2.add(candidate_forms::eta_plus2_delta_squared(g), o.eta_plus2);
            eta_m_d2.add(candidate_forms::eta_minus2_delta_squared(g), o.eta_minus2);
            xi_p.add(g.xi_plus2, o.xi_plus2);
            xi_m.add(g.xi_minus2, o.xi_minus2);
            beta.add(g.beta, o.beta);
            beta_printed.add(-g.beta, o.beta);
        }
        for (auto* b : {&eta_p, &eta_m, &eta_p_lit, &eta_m_lit, &eta_p_d2, &eta_m_d2, &xi_p, &xi_m, &beta, &beta_printed})
            rep.checks.push_back(b->finish());
    }

    // SPADE mean counts: closed forms against |f+ α+ + f- α-|²
    {
        const std::string oracle = "mode-overlap path |f_m+ alpha_+ + f_m- alpha_-|^2";
        auto plane = detail::check("plane_spade_counts_closed", true, oracle,
                                   "ktilde in {0,1,2} x s in {0.5,1,2,3} x m in 0..10", 1e-12,
                                   "2 kappa g^2 gamma_m^2 [1 + (-1)^m cos(ktilde s)], gamma_m^2 with e^{-s^2/4}");
        auto plane_half = detail::check("plane_spade_counts_half_exponent", false, oracle,
                                        "ktilde in {0,1,2} x s in {0.5,1,2,3} x m in 0..10", 1e-12,
                                        "same with e^{-s^2/2}: violates photon-number conservation");
        for (double k : {0.0, 1.0, 2.0})
            for (double s : {0.5, 1.0, 2.0, 3.0}) {
                const auto in = fisher_inputs(PlaneWaveExcitation::from_ktilde(k), EmitterScene{s, 0.0, 1.0, 1.0}, psf);
                for (int m = 0; m <= 10; ++m) {
                    const double oracle_value = spade_counts(in.amps, in.geom, m).mean / in.amps.signal_scale;
                    plane.add(mean_photons_plane_normalized(k, m, s), oracle_value);
                    plane_half.add(candidate_forms::mean_photons_plane_half_exponent(k, m, s), oracle_value);
                }
            }
        rep.checks.push_back(plane.finish());
        rep.checks.push_back(plane_half.finish());

        const std::string vgrid = "a in {0.5, sqrt(2)/2, 1} x psi in {0, 0.2} x s in {0.5,1,2} x m in 0..10";
        auto vortex = detail::check("vortex_spade_counts_closed", true, oracle, vgrid, 1e-12,
                                    "Gaussian factors e^{-s^2/4} e^{-s^2/2a^2} e^{-2psi^2/a^2}");
        auto vortex_swapped = detail::check("vortex_spade_counts_swapped_exponents", false, oracle, vgrid, 1e-12,
                                            "Gaussian factors e^{-s^2/2} e^{-s^2/4a^2} e^{-2psi^2/a^2}");
        for (double a : {0.5, std::sqrt(0.5), 1.0})
            for (double psi : {0.0, 0.2})
                for (double s : {0.5, 1.0, 2.0}) {
                    const auto in = fisher_inputs(VortexExcitation{a, psi}, EmitterScene{s, 0.0, 1.0, 1.0}, psf);
                    for (int m = 0; m <= 10; ++m) {
                        const double oracle_value = spade_counts(in.amps, in.geom, m).mean / in.amps.signal_scale;
                        vortex.add(mean_photons_vortex_normalized(a, psi, m, s), oracle_value);
                        vortex_swapped.add(candidate_forms::mean_photons_vortex_swapped(a, psi, m, s), oracle_value);
                    }
                }
        rep.checks.push_back(vortex.finish());
        rep.checks.push_back(vortex_swapped.finish());
    }
    return rep;
}

}  // namespace cars
