#pragma once

// Spectral weight of the anti-Stokes emission for a single Raman resonance:
//   g·Φ(ω) = W ∫dω'/2π ∫dω₋/2π α_pu² α_St ψ*_pu(ω-ω₋) ψ*_pu(ω'+ω₋) ψ_St(ω') / (ω₋ - ω_v + iγ)
// with W the polarizability weight (field-strength prefactors folded in).

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "cars/numerics/quadrature.hpp"
#include "cars/numerics/special.hpp"

namespace cars {

struct RamanResonance {
    double omega_vib = 3.0;
    double gamma_vib = 0.5;
    double polarizability_weight = 1.0;

    void validate() const {
        if (!(gamma_vib > 0.0)) throw std::invalid_argument("RamanResonance: gamma_vib must be > 0");
        if (!(polarizability_weight > 0.0))
            throw std::invalid_argument("RamanResonance: polarizability_weight must be > 0");
    }
};

/// Pulse spectrum: a Gaussian ψ(ω) = (2π)^{1/2}(2πσ²)^{-1/4} exp(-(ω-c)²/(4σ²)), so that
/// ∫|ψ|² dω/2π = 1, or a tabulated profile with linear interpolation (zero outside the table).
class PulseSpectrum {
public:
    PulseSpectrum(double center, double bandwidth, std::complex<double> amplitude = 1.0)
        : center_(center), bandwidth_(bandwidth), amplitude_(amplitude) {
        if (!(bandwidth > 0.0)) throw std::invalid_argument("PulseSpectrum: bandwidth must be > 0");
        norm_ = std::sqrt(2.0 * numerics::kPi) / std::pow(2.0 * numerics::kPi * bandwidth * bandwidth, 0.25);
        inv_four_var_ = 1.0 / (4.0 * bandwidth * bandwidth);
    }

    /// Tabulated profile on an ascending grid. The profile is rescaled to unit norm; center and
    /// bandwidth are taken from its first two moments of |ψ|².
    static PulseSpectrum tabulated(std::vector<double> omega, std::vector<std::complex<double>> values,
                                   std::complex<double> amplitude = 1.0) {
        if (omega.size() < 2 || omega.size() != values.size())
            throw std::invalid_argument("PulseSpectrum: table needs >= 2 points and matching sizes");
        if (!std::is_sorted(omega.begin(), omega.end()) || omega.front() == omega.back())
            throw std::invalid_argument("PulseSpectrum: table grid must be ascending");
        // trapezoid moments of |ψ|² (the interpolant is piecewise linear in ψ, close enough here)
        double n0 = 0, n1 = 0, n2 = 0;
        for (std::size_t i = 0; i + 1 < omega.size(); ++i) {
            const double h = omega[i + 1] - omega[i];
            const double pa = std::norm(values[i]);
            const double pb = std::norm(values[i + 1]);
            n0 += 0.5 * h * (pa + pb);
            n1 += 0.5 * h * (pa * omega[i] + pb * omega[i + 1]);
            n2 += 0.5 * h * (pa * omega[i] * omega[i] + pb * omega[i + 1] * omega[i + 1]);
        }
        if (!(n0 > 0.0)) throw std::invalid_argument("PulseSpectrum: table has zero norm");
        const double c = n1 / n0;
        const double var = std::max(n2 / n0 - c * c, 1e-300);
        PulseSpectrum p(c, std::sqrt(var), amplitude);
        const double scale = std::sqrt(2.0 * numerics::kPi / n0);
        for (auto& v : values) v *= scale;
        p.table_omega_ = std::move(omega);
        p.table_values_ = std::move(values);
        return p;
    }

    [[nodiscard]] double center() const noexcept { return center_; }
    [[nodiscard]] double bandwidth() const noexcept { return bandwidth_; }
    [[nodiscard]] std::complex<double> amplitude() const noexcept { return amplitude_; }
    [[nodiscard]] bool is_tabulated() const noexcept { return !table_omega_.empty(); }

    [[nodiscard]] PulseSpectrum with_amplitude(std::complex<double> amplitude) const {
        PulseSpectrum p = *this;
        p.amplitude_ = amplitude;
        return p;
    }

    /// Unit-norm profile ψ(ω) (the amplitude is not included).
    [[nodiscard]] std::complex<double> profile(double omega) const {
        if (!is_tabulated()) {
            const double x = omega - center_;
            return norm_ * std::exp(-x * x * inv_four_var_);
        }
        if (omega < table_omega_.front() || omega > table_omega_.back()) return 0.0;
        const auto it = std::upper_bound(table_omega_.begin(), table_omega_.end(), omega);
        const std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - table_omega_.begin()),
                                                     table_omega_.size() - 1);
        const std::size_t lo = hi - 1;
        const double t = (omega - table_omega_[lo]) / (table_omega_[hi] - table_omega_[lo]);
        return (1.0 - t) * table_values_[lo] + t * table_values_[hi];
    }

    /// Interval outside which the profile is negligible (8 amplitude standard deviations).
    [[nodiscard]] numerics::Interval support() const {
        if (is_tabulated()) return {table_omega_.front(), table_omega_.back()};
        const double half = 8.0 * std::sqrt(2.0) * bandwidth_;
        return {center_ - half, center_ + half};
    }

private:
    double center_;
    double bandwidth_;
    std::complex<double> amplitude_;
    double norm_ = 1.0;
    double inv_four_var_ = 1.0;
    std::vector<double> table_omega_;
    std::vector<std::complex<double>> table_values_;
};

/// rms width of |Φ|² for Gaussian pulses.
inline double combined_bandwidth(const PulseSpectrum& pump, const PulseSpectrum& stokes) {
    return std::sqrt(2.0 * pump.bandwidth() * pump.bandwidth() + stokes.bandwidth() * stokes.bandwidth());
}

inline double anti_stokes_center(const PulseSpectrum& pump, const PulseSpectrum& stokes) {
    return 2.0 * pump.center() - stokes.center();
}

namespace detail {

// the evaluation cap turns unresolvable (near-zero linewidth) resonances into a prompt error
inline numerics::QuadratureSpec spectral_spec() { return {1e-15, 1e-10, 40, 1'000'000}; }

// Window of ±8 amplitude standard deviations around the stationary point of a product of two
// Gaussian amplitudes with centers c1, c2 and amplitude variances v1, v2.
inline numerics::Interval gaussian_product_window(double c1, double v1, double c2, double v2) {
    const double v = v1 * v2 / (v1 + v2);
    const double c = (c1 * v2 + c2 * v1) / (v1 + v2);
    const double half = 8.0 * std::sqrt(v);
    return {c - half, c + half};
}

inline numerics::Interval intersect(numerics::Interval a, numerics::Interval b) {
    return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

// ∫dω'/2π ∫dω₋/2π of the resonant kernel with unit amplitudes. The inner ω' integral depends
// on ω₋ only, and the outer ω₋ window is the same for every ω, so the adaptive outer cells are
// dyadic pieces of fixed roots and inner values are memoized by node.
class SpectralKernel {
public:
    SpectralKernel(const RamanResonance& res, const PulseSpectrum& pump, const PulseSpectrum& stokes)
        : res_(res), pump_(pump), stokes_(stokes) {
        const auto pu = pump.support();
        const auto st = stokes.support();
        gaussian_ = !pump.is_tabulated() && !stokes.is_tabulated();
        vp_ = 2.0 * pump.bandwidth() * pump.bandwidth();  // amplitude variances
        vs_ = 2.0 * stokes.bandwidth() * stokes.bandwidth();
        window_ = {pu.lo - st.hi, pu.hi - st.lo};
        if (gaussian_) {
            // the inner integral is a Gaussian in ω₋ centered at c_pu - c_St with variance vp + vs
            const double c = pump.center() - stokes.center();
            const double half = 8.0 * std::sqrt(vp_ + vs_);
            window_ = intersect(window_, {c - half, c + half});
        }
    }

    std::complex<double> operator()(double omega) {
        if (!(window_.hi > window_.lo)) return 0.0;
        const auto spec = spectral_spec();
        auto outer = [&](double wm) -> std::complex<double> {
            const std::complex<double> p = pump_.profile(omega - wm);
            if (p == 0.0) return 0.0;
            return inner(wm) * std::conj(p) / std::complex<double>(wm - res_.omega_vib, res_.gamma_vib) /
                   (2.0 * numerics::kPi);
        };
        if (res_.omega_vib > window_.lo && res_.omega_vib < window_.hi) {
            return numerics::integrate_1d(outer, {window_.lo, res_.omega_vib}, spec).value +
                   numerics::integrate_1d(outer, {res_.omega_vib, window_.hi}, spec).value;
        }
        return numerics::integrate_1d(outer, window_, spec).value;
    }

private:
    std::complex<double> inner(double wm) {
        if (const auto it = cache_.find(wm); it != cache_.end()) return it->second;
        const auto pu = pump_.support();
        const auto st = stokes_.support();
        const auto spec = spectral_spec();
        numerics::Interval w{std::max(st.lo, pu.lo - wm), std::min(st.hi, pu.hi - wm)};
        if (gaussian_) w = intersect(w, gaussian_product_window(pump_.center() - wm, vp_, stokes_.center(), vs_));
        std::complex<double> v = 0.0;
        if (w.hi > w.lo) {
            if (gaussian_) {  // both profiles real
                v = numerics::integrate_1d(
                        [&](double wp) { return pump_.profile(wp + wm).real() * stokes_.profile(wp).real(); }, w, spec)
                        .value;
            } else {
                v = numerics::integrate_1d(
                        [&](double wp) { return std::conj(pump_.profile(wp + wm)) * stokes_.profile(wp); }, w, spec)
                        .value;
            }
            v /= 2.0 * numerics::kPi;
        }
        cache_.emplace(wm, v);
        return v;
    }

    RamanResonance res_;
    PulseSpectrum pump_;
    PulseSpectrum stokes_;
    bool gaussian_ = true;
    double vp_ = 0.0;
    double vs_ = 0.0;
    numerics::Interval window_{0.0, 0.0};
    std::unordered_map<double, std::complex<double>> cache_;
};

}  // namespace detail

/// g·Φ(ω) for one resonance by nested adaptive quadrature.
inline std::complex<double> spectral_weight(const RamanResonance& res, const PulseSpectrum& pump,
                                            const PulseSpectrum& stokes, double omega) {
    res.validate();
    const std::complex<double> amp = pump.amplitude() * pump.amplitude() * stokes.amplitude();
    return res.polarizability_weight * amp * detail::SpectralKernel(res, pump, stokes)(omega);
}

/// Sum over several resonances.
inline std::complex<double> spectral_weight(const std::vector<RamanResonance>& resonances, const PulseSpectrum& pump,
                                            const PulseSpectrum& stokes, double omega) {
    std::complex<double> sum = 0.0;
    for (const auto& r : resonances) sum += spectral_weight(r, pump, stokes, omega);
    return sum;
}

struct NormalizedSpectrum {
    double g = 0.0;
    std::vector<double> omega;                // normalization grid
    std::vector<std::complex<double>> phi;    // Φ on the grid
    std::function<std::complex<double>(double)> evaluate;  // Φ(ω) anywhere
};

/// g = sqrt(∫|g·Φ|² dω/2π) on a 4096-point trapezoid grid spanning ±12 combined bandwidths
/// around 2ω_pu - ω_St; Φ = (g·Φ)/g.
inline NormalizedSpectrum normalize_phi(const RamanResonance& res, const PulseSpectrum& pump,
                                        const PulseSpectrum& stokes, std::size_t grid_points = 4096) {
    res.validate();
    if (grid_points < 3) throw std::invalid_argument("normalize_phi: grid needs >= 3 points");
    const double c = anti_stokes_center(pump, stokes);
    const double half = 12.0 * combined_bandwidth(pump, stokes);
    NormalizedSpectrum out;
    out.omega.resize(grid_points);
    std::vector<std::complex<double>> weight(grid_points);
    const double h = 2.0 * half / static_cast<double>(grid_points - 1);
    numerics::detail::CompensatedSum<double> acc;
    detail::SpectralKernel kernel(res, pump, stokes);
    const std::complex<double> amp =
        res.polarizability_weight * pump.amplitude() * pump.amplitude() * stokes.amplitude();
    for (std::size_t i = 0; i < grid_points; ++i) {
        out.omega[i] = c - half + h * static_cast<double>(i);
        weight[i] = amp * kernel(out.omega[i]);
        const double end = (i == 0 || i + 1 == grid_points) ? 0.5 : 1.0;
        acc.add(end * h * std::norm(weight[i]));
    }
    const double g2 = acc.total() / (2.0 * numerics::kPi);
    out.g = std::sqrt(g2);
    if (!(out.g > 1e-300)) throw std::domain_error("normalize_phi: zero spectral signal");
    out.phi.resize(grid_points);
    for (std::size_t i = 0; i < grid_points; ++i) out.phi[i] = weight[i] / out.g;
    const double g = out.g;
    out.evaluate = [res, pump, stokes, g](double omega) { return spectral_weight(res, pump, stokes, omega) / g; };
    return out;
}

/// Resonance-free oracle: with a constant denominator iγ the triple Gaussian convolution gives
/// |Φ| ∝ exp(-(ω - 2c_pu + c_St)² / (2(4σ_pu² + 2σ_St²))).
inline double resonance_free_shape(const PulseSpectrum& pump, const PulseSpectrum& stokes, double omega) {
    const double v = 4.0 * pump.bandwidth() * pump.bandwidth() + 2.0 * stokes.bandwidth() * stokes.bandwidth();
    const double x = omega - anti_stokes_center(pump, stokes);
    return std::exp(-x * x / (2.0 * v));
}

}  // namespace cars
