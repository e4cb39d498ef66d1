#pragma once

// Point-spread-function geometry: Gaussian and sampled PSFs, the Hermite-Gauss
// measurement basis, the symmetric/antisymmetric image modes u± and every
// separation-dependent overlap scalar needed by the Fisher formulas.
//
// Coordinates: the two images sit at x = (x0 ∓ s/2)·w on the x-axis. Public
// functions take the dimensionless separation s = d/w; derivative quantities
// are with respect to the dimensional separation d.

#include <cmath>
#include <concepts>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include "cars/numerics/quadrature.hpp"
#include "cars/numerics/special.hpp"

namespace cars {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Separations below this use Taylor limits of the Gaussian closed forms.
inline constexpr double kSmallSeparation = 1e-3;

class GaussianPsf {
public:
    explicit GaussianPsf(double width = 1.0) : width_(width) {
        if (!(width > 0.0) || !std::isfinite(width)) throw std::invalid_argument("GaussianPsf: width must be > 0");
    }

    [[nodiscard]] double width() const noexcept { return width_; }
    [[nodiscard]] double support_radius() const noexcept { return 8.0 * width_; }

    [[nodiscard]] double value(Point r) const noexcept {
        const double w2 = width_ * width_;
        return std::sqrt(2.0 / (numerics::kPi * w2)) * std::exp(-(r.x * r.x + r.y * r.y) / w2);
    }
    [[nodiscard]] double grad_x(Point r) const noexcept { return -2.0 * r.x / (width_ * width_) * value(r); }

private:
    double width_;
};

/// A PSF given only by an evaluator; derivatives by central differences unless supplied.
class NumericPsf {
public:
    using Evaluator = std::function<double(Point)>;

    NumericPsf(Evaluator evaluator, double support_radius, double width = 1.0, Evaluator gradient_x = {})
        : evaluator_(std::move(evaluator)),
          gradient_x_(std::move(gradient_x)),
          support_radius_(support_radius),
          width_(width) {
        if (!evaluator_) throw std::invalid_argument("NumericPsf: empty evaluator");
        if (!(support_radius > 0.0)) throw std::invalid_argument("NumericPsf: support_radius must be > 0");
        if (!(width > 0.0)) throw std::invalid_argument("NumericPsf: width must be > 0");
    }

    /// Samples an analytic Gaussian; used to cross-check closed forms against quadrature.
    static NumericPsf from(const GaussianPsf& psf) {
        return NumericPsf([psf](Point r) { return psf.value(r); }, psf.support_radius(), psf.width());
    }

    [[nodiscard]] double width() const noexcept { return width_; }
    [[nodiscard]] double support_radius() const noexcept { return support_radius_; }
    [[nodiscard]] double value(Point r) const { return evaluator_(r); }
    [[nodiscard]] double grad_x(Point r) const {
        if (gradient_x_) return gradient_x_(r);
        const double h = 1e-5 * width_;
        return (evaluator_({r.x + h, r.y}) - evaluator_({r.x - h, r.y})) / (2.0 * h);
    }

private:
    Evaluator evaluator_;
    Evaluator gradient_x_;
    double support_radius_;
    double width_;
};

template <class P>
concept PointSpreadFunction = requires(const P& psf, Point r) {
    { psf.value(r) } -> std::convertible_to<double>;
    { psf.grad_x(r) } -> std::convertible_to<double>;
    { psf.width() } -> std::convertible_to<double>;
    { psf.support_radius() } -> std::convertible_to<double>;
};

template <PointSpreadFunction P>
double psf_value(const P& psf, Point r) {
    return psf.value(r);
}

/// Hermite-Gauss modes u_k(r) = H_k(√2 x/w) u0(r) / sqrt(2^k k!), k = 0..truncation.
class HermiteGaussBasis {
public:
    HermiteGaussBasis(GaussianPsf psf, int truncation) : psf_(psf), truncation_(truncation) {
        if (truncation < 0) throw std::invalid_argument("HermiteGaussBasis: truncation must be >= 0");
    }
    explicit HermiteGaussBasis(int truncation, double width = 1.0) : HermiteGaussBasis(GaussianPsf(width), truncation) {}

    [[nodiscard]] const GaussianPsf& psf() const noexcept { return psf_; }
    [[nodiscard]] double width() const noexcept { return psf_.width(); }
    [[nodiscard]] int truncation() const noexcept { return truncation_; }

    void check_index(int k) const {
        if (k < 0 || k > truncation_)
            throw std::out_of_range("HermiteGaussBasis: mode " + std::to_string(k) + " outside [0, " +
                                    std::to_string(truncation_) + "]");
    }

private:
    GaussianPsf psf_;
    int truncation_;
};

inline double hg_mode_value(const HermiteGaussBasis& basis, int k, Point r) {
    basis.check_index(k);
    // normalized recurrence h_k = H_k(ξ)/sqrt(2^k k!) avoids overflow for large k
    const double xi = std::sqrt(2.0) * r.x / basis.width();
    double prev = 1.0;
    double cur = 1.0;
    if (k >= 1) cur = std::sqrt(2.0) * xi;
    for (int j = 1; j < k; ++j) {
        const double next = std::sqrt(2.0 / (j + 1.0)) * xi * cur - std::sqrt(j / (j + 1.0)) * prev;
        prev = cur;
        cur = next;
    }
    return (k == 0 ? 1.0 : cur) * basis.psf().value(r);
}

/// γ_k(s) = e^{-s²/8} (s/2)^k / sqrt(k!): overlap of u_k with the PSF displaced by +s/2.
inline double gamma_k(int k, double s) {
    if (k < 0) throw std::invalid_argument("gamma_k: k must be >= 0");
    if (s < 0.0) throw std::invalid_argument("gamma_k: s must be >= 0");
    if (s == 0.0) return k == 0 ? 1.0 : 0.0;
    if (k <= 20) {
        return std::exp(-s * s / 8.0) * std::pow(0.5 * s, k) / std::sqrt(std::exp(numerics::log_factorial(k)));
    }
    return std::exp(-s * s / 8.0 + k * std::log(0.5 * s) - 0.5 * numerics::log_factorial(k));
}

/// dγ_k/ds.
inline double gamma_k_derivative(int k, double s) {
    if (k < 0) throw std::invalid_argument("gamma_k_derivative: k must be >= 0");
    if (s == 0.0) return k == 1 ? 0.5 : 0.0;
    // γ_k' = γ_k (k/s - s/4)
    return gamma_k(k, s) * (k / s - 0.25 * s);
}

/// Separation-dependent PSF scalars. Lengths in the units of the PSF width.
struct PsfGeometry {
    double s = 0.0;
    double width = 1.0;
    double delta = 1.0;            // ∫ u0(r-r1) u0(r-r2) dr
    double one_minus_delta = 0.0;  // 1 - δ without cancellation
    double delta_prime = 0.0;      // ∂_d δ
    double dk2 = 0.0;              // ∫ |∂x u0|² dr
    double beta = 0.0;             // ∫ ∂x u0(r-r1) ∂x u0(r-r2) dr
    double eta_plus2 = 0.0;        // ‖∂_d u+‖²
    double eta_minus2 = 0.0;       // ‖∂_d u-‖²
    double xi_plus2 = 0.0;         // ‖∂_x0 u+‖² with the u- component removed
    double xi_minus2 = 0.0;        // ‖∂_x0 u-‖² with the u+ component removed
    // Overlaps used by the two-parameter QFI matrix.
    double mode_coupling = 0.0;     // t = ⟨u-|∂_x0 u+⟩ = -⟨u+|∂_x0 u-⟩ = δ'/sqrt(1-δ²)
    double x0_norm_plus = 0.0;      // ‖∂_x0 u+‖² = ξ+² + t²
    double x0_norm_minus = 0.0;     // ‖∂_x0 u-‖² = ξ-² + t²
    double cross_plus_minus = 0.0;  // ⟨∂_d u+|∂_x0 u-⟩
    double cross_minus_plus = 0.0;  // ⟨∂_d u-|∂_x0 u+⟩
};

/// Closed forms for the Gaussian PSF.
inline PsfGeometry gaussian_geometry(double s, double width = 1.0) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("psf_geometry: s must be finite and >= 0");
    const double w2 = width * width;
    const double u = 0.5 * s * s;
    const double q = std::exp(-u);
    PsfGeometry g;
    g.s = s;
    g.width = width;
    g.delta = q;
    g.one_minus_delta = -std::expm1(-u);
    g.delta_prime = -(s / width) * q;
    g.dk2 = 1.0 / w2;
    g.beta = q * (1.0 - s * s) / w2;

    if (s < kSmallSeparation) {
        const double s2 = s * s;
        const double s4 = s2 * s2;
        g.eta_plus2 = s2 / 8.0 / w2;
        g.eta_minus2 = s2 / 24.0 / w2;
        g.xi_plus2 = s4 / 24.0 / w2;
        g.xi_minus2 = (2.0 - s4 / 24.0) / w2;
        g.mode_coupling = -(1.0 - s2 / 4.0 + s4 / 96.0) / width;
        g.x0_norm_plus = (1.0 - s2 / 2.0 + s4 / 8.0) / w2;
        g.x0_norm_minus = (3.0 - s2 / 2.0 + s4 / 24.0) / w2;
        g.cross_plus_minus = (-s / 2.0 + s4 * s / 64.0) / w2;
        g.cross_minus_plus = -s2 * s / 24.0 / w2;
        return g;
    }

    const double one_minus_q2 = -std::expm1(-2.0 * u);
    g.eta_plus2 = (one_minus_q2 + 2.0 * u * q) / (4.0 * (1.0 + q) * (1.0 + q)) / w2;
    double sinh_minus_u_over_sinh;  // 1 - u/sinh(u)
    if (u < 1.0) {
        const double smu = numerics::sinh_minus_identity(u);
        const double half_sinh = std::sinh(0.5 * u);
        g.eta_minus2 = smu / (8.0 * half_sinh * half_sinh) / w2;
        sinh_minus_u_over_sinh = smu / std::sinh(u);
    } else {
        const double one_minus_q = -std::expm1(-u);
        g.eta_minus2 = (one_minus_q2 - 2.0 * u * q) / (4.0 * one_minus_q * one_minus_q) / w2;
        sinh_minus_u_over_sinh = 1.0 - 2.0 * u * q / one_minus_q2;
    }
    g.xi_plus2 = sinh_minus_u_over_sinh / w2;
    g.xi_minus2 = (2.0 - sinh_minus_u_over_sinh) / w2;
    g.mode_coupling = -(s / width) * q / std::sqrt(one_minus_q2);
    g.x0_norm_plus = (1.0 - s * s * q / (1.0 + q)) / w2;
    g.x0_norm_minus = (1.0 + s * s * q / g.one_minus_delta) / w2;
    const double ratio = std::sqrt((1.0 + q) / g.one_minus_delta);
    g.cross_plus_minus = -2.0 * g.eta_plus2 * ratio;
    g.cross_minus_plus = -2.0 * g.eta_minus2 / ratio;
    return g;
}

namespace detail {

// Fills the derived scalars from δ, δ', (Δk)², β via the general algebra.
inline void complete_geometry(PsfGeometry& g) {
    const double d = g.delta;
    const double omd = g.one_minus_delta;
    const double dp2 = g.delta_prime * g.delta_prime;
    g.eta_plus2 = ((g.dk2 - g.beta) * (1.0 + d) - dp2) / (4.0 * (1.0 + d) * (1.0 + d));
    g.eta_minus2 = ((g.dk2 + g.beta) * omd - dp2) / (4.0 * omd * omd);
    g.x0_norm_plus = (g.dk2 + g.beta) / (1.0 + d);
    g.x0_norm_minus = (g.dk2 - g.beta) / omd;
    g.mode_coupling = g.delta_prime / std::sqrt(omd * (1.0 + d));
    const double t2 = g.mode_coupling * g.mode_coupling;
    g.xi_plus2 = g.x0_norm_plus - t2;
    g.xi_minus2 = g.x0_norm_minus - t2;
    const double ratio = std::sqrt((1.0 + d) / omd);
    g.cross_plus_minus = -2.0 * g.eta_plus2 * ratio;
    g.cross_minus_plus = -2.0 * g.eta_minus2 / ratio;
}

template <PointSpreadFunction P>
numerics::Rect overlap_domain(const P& psf, double s) {
    return numerics::Rect::square(0.5 * s * psf.width() + psf.support_radius());
}

inline numerics::QuadratureSpec overlap_spec() { return {1e-10, 0.0, 30, 50'000'000}; }

}  // namespace detail

/// δ(s): closed form for the Gaussian, 2D quadrature otherwise.
template <PointSpreadFunction P>
double overlap_delta(const P& psf, double s) {
    if (s < 0.0) throw std::invalid_argument("overlap_delta: s must be >= 0");
    if constexpr (std::same_as<P, GaussianPsf>) {
        return std::exp(-0.5 * s * s);
    } else {
        const double h = 0.5 * s * psf.width();
        return numerics::integrate_2d([&](double x, double y) { return psf.value({x + h, y}) * psf.value({x - h, y}); },
                                      detail::overlap_domain(psf, s), detail::overlap_spec())
            .value;
    }
}

/// β(s) = ∫ ∂x u0(r-r1) ∂x u0(r-r2) dr.
template <PointSpreadFunction P>
double overlap_beta(const P& psf, double s) {
    if (s < 0.0) throw std::invalid_argument("overlap_beta: s must be >= 0");
    if constexpr (std::same_as<P, GaussianPsf>) {
        const double w = psf.width();
        return std::exp(-0.5 * s * s) * (1.0 - s * s) / (w * w);
    } else {
        const double h = 0.5 * s * psf.width();
        return numerics::integrate_2d([&](double x, double y) { return psf.grad_x({x + h, y}) * psf.grad_x({x - h, y}); },
                                      detail::overlap_domain(psf, s), detail::overlap_spec())
            .value;
    }
}

/// All overlap scalars at separation s. The sampled-PSF path needs s >= kSmallSeparation
/// (the antisymmetric-mode quantities are 0/0 limits there).
template <PointSpreadFunction P>
PsfGeometry psf_geometry(const P& psf, double s) {
    if constexpr (std::same_as<P, GaussianPsf>) {
        return gaussian_geometry(s, psf.width());
    } else {
        if (!(s >= kSmallSeparation))
            throw std::domain_error("psf_geometry: sampled PSFs need s >= " + std::to_string(kSmallSeparation));
        const double h = 0.5 * s * psf.width();
        const auto domain = detail::overlap_domain(psf, s);
        const auto spec = detail::overlap_spec();
        PsfGeometry g;
        g.s = s;
        g.width = psf.width();
        g.delta = overlap_delta(psf, s);
        g.one_minus_delta = 1.0 - g.delta;
        g.beta = overlap_beta(psf, s);
        g.delta_prime = numerics::integrate_2d(
                            [&](double x, double y) {
                                return 0.5 * (psf.grad_x({x + h, y}) * psf.value({x - h, y}) -
                                              psf.value({x + h, y}) * psf.grad_x({x - h, y}));
                            },
                            domain, spec)
                            .value;
        g.dk2 = numerics::integrate_2d(
                    [&](double x, double y) {
                        const double gx = psf.grad_x({x, y});
                        return gx * gx;
                    },
                    domain, spec)
                    .value;
        detail::complete_geometry(g);
        return g;
    }
}

/// Pointwise values of u± and ∂_d u± (images at x = (x0 ∓ s/2)·w).
struct ModeValues {
    double u_plus = 0.0;
    double u_minus = 0.0;
    double d_u_plus = 0.0;
    double d_u_minus = 0.0;
};

template <PointSpreadFunction P>
ModeValues image_modes(const P& psf, const PsfGeometry& geom, double x0, Point r) {
    const double w = psf.width();
    const double x1 = (x0 - 0.5 * geom.s) * w;
    const double x2 = (x0 + 0.5 * geom.s) * w;
    const Point r1{r.x - x1, r.y};
    const Point r2{r.x - x2, r.y};
    const double p1 = psf.value(r1);
    const double p2 = psf.value(r2);
    const double g1 = psf.grad_x(r1);
    const double g2 = psf.grad_x(r2);
    const double n_plus = 1.0 / std::sqrt(2.0 * (1.0 + geom.delta));
    const double n_minus = 1.0 / std::sqrt(2.0 * geom.one_minus_delta);
    const double dn_plus = -geom.delta_prime * n_plus * n_plus * n_plus;
    const double dn_minus = geom.delta_prime * n_minus * n_minus * n_minus;
    ModeValues m;
    m.u_plus = n_plus * (p1 + p2);
    m.u_minus = n_minus * (p1 - p2);
    m.d_u_plus = dn_plus * (p1 + p2) + n_plus * 0.5 * (g1 - g2);
    m.d_u_minus = dn_minus * (p1 - p2) + n_minus * 0.5 * (g1 + g2);
    return m;
}

/// ∫ u0² dr over the PSF's support square.
template <PointSpreadFunction P>
double psf_norm_squared(const P& psf, const numerics::QuadratureSpec& spec = {}) {
    return numerics::integrate_2d(
               [&](double x, double y) {
                   const double v = psf.value({x, y});
                   return v * v;
               },
               numerics::Rect::square(psf.support_radius()), spec)
        .value;
}

}  // namespace cars
