#pragma once

// Independent quadrature oracles for the closed forms: derivative-mode norms evaluated
// directly on the plane, and the QFI matrix from finite differences of the image field.

#include <cmath>
#include <complex>

#include "cars/excitation.hpp"
#include "cars/fisher.hpp"
#include "cars/numerics/quadrature.hpp"
#include "cars/psf_modes.hpp"

namespace cars::oracles {

inline numerics::QuadratureSpec oracle_spec() { return {1e-11, 1e-11, 30, 50'000'000}; }

struct ModeNorms {
    double eta_plus2 = 0.0;   // ∫ |∂_d u+|²
    double eta_minus2 = 0.0;  // ∫ |∂_d u-|²
    double xi_plus2 = 0.0;    // ‖∂_x0 u+‖² - |⟨u-|∂_x0 u+⟩|²
    double xi_minus2 = 0.0;   // ‖∂_x0 u-‖² - |⟨u+|∂_x0 u-⟩|²
    double beta = 0.0;        // ∫ ∂x u0(r-r1) ∂x u0(r-r2)
    double delta = 0.0;
};

/// Derivative-mode integrals on the plane, with u± built from u0 directly.
template <PointSpreadFunction P>
ModeNorms mode_norms(const P& psf, double s) {
    if (!(s > 0.0)) throw std::domain_error("mode_norms: s must be > 0");
    const double w = psf.width();
    const double h = 0.5 * s * w;
    const auto domain = numerics::Rect::square(h + psf.support_radius());
    const auto spec = oracle_spec();
    auto integrate = [&](auto&& f) { return numerics::integrate_2d(f, domain, spec).value; };

    ModeNorms out;
    out.delta = integrate([&](double x, double y) { return psf.value({x + h, y}) * psf.value({x - h, y}); });
    out.beta = integrate([&](double x, double y) { return psf.grad_x({x + h, y}) * psf.grad_x({x - h, y}); });
    const double n_plus = 1.0 / std::sqrt(2.0 * (1.0 + out.delta));
    const double n_minus = 1.0 / std::sqrt(2.0 * (1.0 - out.delta));
    // ∂_d of u± by central differences of the normalized modes; the images move by ±step/2,
    // so d changes by 2·step
    const double step = 1e-5 * w;
    auto mode = [&](double sign, double half, double x, double y) {
        return psf.value({x + half, y}) + sign * psf.value({x - half, y});
    };
    auto norm_at = [&](double sign, double half) {
        const double dd = integrate([&](double x, double y) { return psf.value({x + half, y}) * psf.value({x - half, y}); });
        return 1.0 / std::sqrt(2.0 * (1.0 + sign * dd));
    };
    const double np_up = norm_at(1.0, h + 0.5 * step), np_dn = norm_at(1.0, h - 0.5 * step);
    const double nm_up = norm_at(-1.0, h + 0.5 * step), nm_dn = norm_at(-1.0, h - 0.5 * step);
    out.eta_plus2 = integrate([&](double x, double y) {
        const double v = (np_up * mode(1.0, h + 0.5 * step, x, y) - np_dn * mode(1.0, h - 0.5 * step, x, y)) / (2.0 * step);
        return v * v;
    });
    out.eta_minus2 = integrate([&](double x, double y) {
        const double v = (nm_up * mode(-1.0, h + 0.5 * step, x, y) - nm_dn * mode(-1.0, h - 0.5 * step, x, y)) / (2.0 * step);
        return v * v;
    });
    // ∂_x0 u± = -N± (u0'(r-r1) ± u0'(r-r2)); the images sit at ∓h
    auto dx_mode = [&](double sign, double x, double y) {
        return -(psf.grad_x({x + h, y}) + sign * psf.grad_x({x - h, y}));
    };
    const double xp_norm = n_plus * n_plus * integrate([&](double x, double y) {
                               const double v = dx_mode(1.0, x, y);
                               return v * v;
                           });
    const double xm_norm = n_minus * n_minus * integrate([&](double x, double y) {
                               const double v = dx_mode(-1.0, x, y);
                               return v * v;
                           });
    const double t_plus = n_plus * n_minus * integrate([&](double x, double y) {
                              return (psf.value({x + h, y}) - psf.value({x - h, y})) * dx_mode(1.0, x, y);
                          });
    const double t_minus = n_plus * n_minus * integrate([&](double x, double y) {
                               return (psf.value({x + h, y}) + psf.value({x - h, y})) * dx_mode(-1.0, x, y);
                           });
    out.xi_plus2 = xp_norm - t_plus * t_plus;
    out.xi_minus2 = xm_norm - t_minus * t_minus;
    return out;
}

/// Q_kl = 4 Re ∫ conj(∂_k E) ∂_l E dr for the image field E = sqrt(κ) Σ_i α(r_i) u0(r - r_i),
/// with derivatives by central differences in d and x0. Gaussian PSF.
inline QfiMatrix qfi_matrix_field(const Excitation& exc, const EmitterScene& scene, const GaussianPsf& psf) {
    const double w = psf.width();
    const double step = 1e-5;
    const double row = detail::emitter_row(exc);
    auto field = [&](double s, double x0, double x, double y) -> complex {
        EmitterScene sc = scene;
        sc.s = s;
        sc.x0 = x0;
        const double x1 = x0 - 0.5 * s;
        const double x2 = x0 + 0.5 * s;
        const complex a1 = emission_amplitude(exc, sc, {x1, row});
        const complex a2 = emission_amplitude(exc, sc, {x2, row});
        return std::sqrt(sc.kappa) * (a1 * psf.value({x - x1 * w, y}) + a2 * psf.value({x - x2 * w, y}));
    };
    const double s = scene.s;
    const double x0 = scene.x0;
    const double s_lo = std::max(0.0, s - step);
    const double s_hi = s + step;
    auto d_d = [&](double x, double y) { return (field(s_hi, x0, x, y) - field(s_lo, x0, x, y)) / ((s_hi - s_lo) * w); };
    auto d_x = [&](double x, double y) {
        return (field(s, x0 + step, x, y) - field(s, x0 - step, x, y)) / (2.0 * step * w);
    };
    const auto domain = direct_imaging_domain(s, x0, w);
    numerics::QuadratureSpec spec{1e-10 * scene.signal_scale(), 1e-10, 30, 50'000'000};
    QfiMatrix q;
    q.q_dd = 4.0 * numerics::integrate_2d([&](double x, double y) { return std::norm(d_d(x, y)); }, domain, spec).value;
    q.q_x0x0 = 4.0 * numerics::integrate_2d([&](double x, double y) { return std::norm(d_x(x, y)); }, domain, spec).value;
    q.q_dx0 = 4.0 * numerics::integrate_2d([&](double x, double y) { return std::real(std::conj(d_d(x, y)) * d_x(x, y)); },
                                           domain, spec)
                        .value;
    return q;
}

}  // namespace cars::oracles
