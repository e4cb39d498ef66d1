#pragma once

// Excitation profiles and the coherent image-plane amplitudes α± = sqrt(κ(1±δ)/2)[α(r1) ± α(r2)].
//
// Emission amplitudes are α(r) = -i g u_St(r) (u_pu*(r))². Excitation parameters are
// dimensionless (wavevectors times w, waist ratio a = w_St/w, shift ψ = y0/w); the
// amplitude derivatives are taken with respect to the dimensional d and x0.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cars/numerics/differentiation.hpp"
#include "cars/numerics/special.hpp"
#include "cars/psf_modes.hpp"

namespace cars {

using complex = std::complex<double>;

struct PlaneWaveExcitation {
    double k_pu_x = 0.0;
    double k_pu_y = 0.0;
    double k_st_x = 0.0;
    double k_st_y = 0.0;
    double pump_phase = 0.0;    // constant phase of u_pu (radians)
    double stokes_phase = 0.0;  // constant phase of u_St

    static PlaneWaveExcitation from_ktilde(double ktilde) {
        PlaneWaveExcitation e;
        e.k_st_x = ktilde;
        return e;
    }

    [[nodiscard]] double ktilde() const noexcept { return k_st_x - 2.0 * k_pu_x; }
    [[nodiscard]] bool consistent_with(double ktilde_value, double tol = 1e-12) const noexcept {
        return std::abs(ktilde() - ktilde_value) <= tol * std::max(1.0, std::abs(ktilde_value));
    }
};

/// Laguerre-Gauss (l = 1) Stokes beam centered on the optical axis, plane-wave pump.
struct VortexExcitation {
    double a = std::sqrt(0.5);  // w_St / w
    double psi = 0.0;           // emitter row y0 / w
    double pump_phase = 0.0;
    double stokes_phase = 0.0;

    void validate() const {
        if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("VortexExcitation: a must be > 0");
        if (!std::isfinite(psi)) throw std::invalid_argument("VortexExcitation: psi must be finite");
    }
    [[nodiscard]] double n_st() const { return std::sqrt(2.0 * numerics::kE) / a; }
};

/// Any excitation given as the dimensionless product u_St(r) (u_pu*(r))²; emitters sit at y = psi.
struct GenericExcitation {
    std::function<complex(Point)> profile;
    double psi = 0.0;
};

using Excitation = std::variant<PlaneWaveExcitation, VortexExcitation, GenericExcitation>;

struct EmitterScene {
    double s = 0.0;      // d / w
    double x0 = 0.0;     // centroid / w
    double g = 1.0;      // coupling prefactor
    double kappa = 1.0;  // transmission

    void validate() const {
        if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("EmitterScene: s must be finite and >= 0");
        if (!std::isfinite(x0)) throw std::invalid_argument("EmitterScene: x0 must be finite");
        if (!(g > 0.0) || !std::isfinite(g)) throw std::invalid_argument("EmitterScene: g must be > 0");
        if (!(kappa > 0.0 && kappa <= 1.0)) throw std::invalid_argument("EmitterScene: kappa must lie in (0, 1]");
    }
    [[nodiscard]] double signal_scale() const noexcept { return 2.0 * kappa * g * g; }
};

enum class AmplitudeProvenance { analytic, finite_difference };

inline const char* to_string(AmplitudeProvenance p) {
    return p == AmplitudeProvenance::analytic ? "analytic" : "finite_difference";
}

struct ImageAmplitudes {
    complex alpha_plus;
    complex alpha_minus;
    complex d_d_alpha_plus;    // ∂/∂d
    complex d_d_alpha_minus;
    complex d_x0_alpha_plus;   // ∂/∂x0 (dimensional)
    complex d_x0_alpha_minus;
    AmplitudeProvenance provenance = AmplitudeProvenance::analytic;
    double s = 0.0;
    double x0 = 0.0;
    double width = 1.0;
    double signal_scale = 2.0;  // 2κg²

    [[nodiscard]] double total_photons() const { return std::norm(alpha_plus) + std::norm(alpha_minus); }
};

namespace detail {

inline complex unit_phase(double phi) { return std::polar(1.0, phi); }

// Dimensionless profile u_St (u_pu*)² and its x-derivative at (x, y) in units of w.
struct ProfileValue {
    complex value;
    complex d_x;
};

inline ProfileValue profile(const PlaneWaveExcitation& e, Point r) {
    const double kx = e.k_st_x - 2.0 * e.k_pu_x;
    const double ky = e.k_st_y - 2.0 * e.k_pu_y;
    const complex phase = unit_phase(e.stokes_phase - 2.0 * e.pump_phase);
    const complex v = phase * unit_phase(kx * r.x + ky * r.y);
    return {v, complex(0.0, kx) * v};
}

inline ProfileValue profile(const VortexExcitation& e, Point r) {
    const double a2 = e.a * e.a;
    const complex phase = unit_phase(e.stokes_phase - 2.0 * e.pump_phase);
    const double env = e.n_st() * std::exp(-(r.x * r.x + r.y * r.y) / a2);
    const complex z(r.x, r.y);
    return {phase * env * z, phase * env * (1.0 - 2.0 * r.x * z / a2)};
}

inline complex profile_value(const Excitation& exc, Point r) {
    return std::visit(
        [&](const auto& e) -> complex {
            using E = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<E, GenericExcitation>) return e.profile(r);
            else return profile(e, r).value;
        },
        exc);
}

inline double emitter_row(const Excitation& exc) {
    return std::visit(
        [](const auto& e) -> double {
            using E = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<E, PlaneWaveExcitation>) return 0.0;
            else return e.psi;
        },
        exc);
}

inline bool has_closed_form(const Excitation& exc) { return !std::holds_alternative<GenericExcitation>(exc); }

inline void validate(const Excitation& exc) {
    if (const auto* v = std::get_if<VortexExcitation>(&exc)) v->validate();
    if (const auto* gen = std::get_if<GenericExcitation>(&exc)) {
        if (!gen->profile) throw std::invalid_argument("GenericExcitation: empty profile");
    }
}

inline constexpr double kFiniteDifferenceStep = 1e-5;

}  // namespace detail

/// -i g u_St(r) (u_pu*(r))² at the dimensionless point r.
inline complex emission_amplitude(const Excitation& exc, const EmitterScene& scene, Point r) {
    return complex(0.0, -scene.g) * detail::profile_value(exc, r);
}

/// α±, ∂_d α± and ∂_x0 α± for the scene. Closed-form families use analytic profile
/// derivatives; generic profiles use central differences with step 1e-5.
template <PointSpreadFunction P>
ImageAmplitudes image_amplitudes(const Excitation& exc, const EmitterScene& scene, const P& psf,
                                 const PsfGeometry& geom) {
    scene.validate();
    detail::validate(exc);
    const double w = psf.width();
    const double y = detail::emitter_row(exc);
    const Point r1{scene.x0 - 0.5 * scene.s, y};
    const Point r2{scene.x0 + 0.5 * scene.s, y};
    const complex mig(0.0, -scene.g);

    complex a1;
    complex a2;
    complex ax1;  // ∂α/∂x (dimensional) at r1
    complex ax2;
    AmplitudeProvenance provenance = AmplitudeProvenance::analytic;
    if (const auto* gen = std::get_if<GenericExcitation>(&exc)) {
        provenance = AmplitudeProvenance::finite_difference;
        const double h = detail::kFiniteDifferenceStep;
        auto along_x = [&](Point r) {
            return [&, r](double x) { return gen->profile({x, r.y}); };
        };
        a1 = mig * gen->profile(r1);
        a2 = mig * gen->profile(r2);
        ax1 = mig * numerics::finite_difference(along_x(r1), r1.x, h) / w;
        ax2 = mig * numerics::finite_difference(along_x(r2), r2.x, h) / w;
    } else {
        std::visit(
            [&](const auto& e) {
                using E = std::decay_t<decltype(e)>;
                if constexpr (!std::is_same_v<E, GenericExcitation>) {
                    const auto p1 = detail::profile(e, r1);
                    const auto p2 = detail::profile(e, r2);
                    a1 = mig * p1.value;
                    a2 = mig * p2.value;
                    ax1 = mig * p1.d_x / w;
                    ax2 = mig * p2.d_x / w;
                }
            },
            exc);
    }

    const double kappa = scene.kappa;
    const double p_plus = std::sqrt(0.5 * kappa * (1.0 + geom.delta));
    const double p_minus = std::sqrt(0.5 * kappa * geom.one_minus_delta);
    const double dp_plus = kappa * geom.delta_prime / (4.0 * p_plus);
    // at s = 0 the antisymmetric prefactor grows linearly: limit sqrt(κ (Δk)²)/2
    const double dp_minus =
        geom.s == 0.0 ? 0.5 * std::sqrt(kappa * geom.dk2) : -kappa * geom.delta_prime / (4.0 * p_minus);

    ImageAmplitudes out;
    out.alpha_plus = p_plus * (a1 + a2);
    out.alpha_minus = p_minus * (a1 - a2);
    out.d_d_alpha_plus = dp_plus * (a1 + a2) + p_plus * 0.5 * (ax2 - ax1);
    out.d_d_alpha_minus = dp_minus * (a1 - a2) - p_minus * 0.5 * (ax1 + ax2);
    out.d_x0_alpha_plus = p_plus * (ax1 + ax2);
    out.d_x0_alpha_minus = p_minus * (ax1 - ax2);
    out.provenance = provenance;
    out.s = scene.s;
    out.x0 = scene.x0;
    out.width = w;
    out.signal_scale = scene.signal_scale();
    return out;
}

template <PointSpreadFunction P>
ImageAmplitudes image_amplitudes(const Excitation& exc, const EmitterScene& scene, const P& psf) {
    return image_amplitudes(exc, scene, psf, psf_geometry(psf, scene.s));
}

struct DerivativeCheckReport {
    double max_deviation = 0.0;  // relative to max(|analytic|, sqrt(2κ) g / w)
    double worst_s = 0.0;
    std::string worst_component;
    int points = 0;
};

/// Compares the analytic ∂_d α± and ∂_x0 α± with finite differences of α± over `s_grid`
/// (central differences, second-order forward differences at s < h).
template <PointSpreadFunction P>
DerivativeCheckReport amplitude_derivative_check(const Excitation& exc, const EmitterScene& scene, const P& psf,
                                                 const std::vector<double>& s_grid) {
    const double h = detail::kFiniteDifferenceStep;
    const double w = psf.width();
    DerivativeCheckReport report;
    for (double s : s_grid) {
        EmitterScene at = scene;
        at.s = s;
        const auto analytic = image_amplitudes(exc, at, psf);
        const double scale = std::sqrt(2.0 * at.kappa) * at.g / w;
        auto amps_at = [&](double si, double x0i) {
            EmitterScene sc = at;
            sc.s = si;
            sc.x0 = x0i;
            return image_amplitudes(exc, sc, psf);
        };
        const auto stencil = s < 2.0 * h ? numerics::Stencil::forward2 : numerics::Stencil::central2;
        const complex fd_d_plus =
            numerics::finite_difference([&](double v) { return amps_at(v, at.x0).alpha_plus; }, s, h, stencil) / w;
        const complex fd_d_minus =
            numerics::finite_difference([&](double v) { return amps_at(v, at.x0).alpha_minus; }, s, h, stencil) / w;
        const complex fd_x_plus =
            numerics::finite_difference([&](double v) { return amps_at(s, v).alpha_plus; }, at.x0, h) / w;
        const complex fd_x_minus =
            numerics::finite_difference([&](double v) { return amps_at(s, v).alpha_minus; }, at.x0, h) / w;
        const std::pair<const char*, std::pair<complex, complex>> pairs[] = {
            {"d_d_alpha_plus", {analytic.d_d_alpha_plus, fd_d_plus}},
            {"d_d_alpha_minus", {analytic.d_d_alpha_minus, fd_d_minus}},
            {"d_x0_alpha_plus", {analytic.d_x0_alpha_plus, fd_x_plus}},
            {"d_x0_alpha_minus", {analytic.d_x0_alpha_minus, fd_x_minus}},
        };
        for (const auto& [name, values] : pairs) {
            const double dev = std::abs(values.first - values.second) / std::max(std::abs(values.first), scale);
            if (dev >= report.max_deviation) {
                report.max_deviation = dev;
                report.worst_s = s;
                report.worst_component = name;
            }
        }
        ++report.points;
    }
    return report;
}

}  // namespace cars
