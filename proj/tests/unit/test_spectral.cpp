#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "cars/numerics/special.hpp"
#include "cars/spectral.hpp"

using namespace cars;
using cplx = std::complex<double>;

namespace {

// Dense uniform-grid evaluation of the same double integral (independent of the adaptive path).
cplx brute_force(const RamanResonance& res, const PulseSpectrum& pu, const PulseSpectrum& st, double omega, double h) {
    const double two_pi = 2.0 * numerics::kPi;
    const double c = pu.center() - st.center();
    const double span = 10.0 * std::sqrt(2.0 * (pu.bandwidth() * pu.bandwidth() + st.bandwidth() * st.bandwidth()));
    cplx outer = 0.0;
    for (double wm = c - span; wm <= c + span; wm += h) {
        double inner = 0.0;
        const double h2 = st.bandwidth() / 40.0;
        for (double wp = st.center() - 12 * st.bandwidth(); wp <= st.center() + 12 * st.bandwidth(); wp += h2)
            inner += pu.profile(wp + wm).real() * st.profile(wp).real() * h2;
        outer += inner / two_pi * std::conj(pu.profile(omega - wm)) / cplx(wm - res.omega_vib, res.gamma_vib) * h;
    }
    return res.polarizability_weight * pu.amplitude() * pu.amplitude() * st.amplitude() * outer / two_pi;
}

}  // namespace

TEST(PulseSpectrum, UnitNorm) {
    const PulseSpectrum p(10.0, 0.7);
    double acc = 0.0;
    const double h = 1e-3;
    for (double w = 0.0; w < 20.0; w += h) acc += std::norm(p.profile(w)) * h;
    EXPECT_NEAR(acc / (2.0 * numerics::kPi), 1.0, 1e-9);
    EXPECT_THROW(PulseSpectrum(1.0, 0.0), std::invalid_argument);
}

TEST(PulseSpectrum, TabulatedGaussianMatchesAnalytic) {
    const PulseSpectrum p(7.0, 1.0);
    std::vector<double> om;
    std::vector<cplx> v;
    for (double w = -3.0; w <= 17.0; w += 0.01) {
        om.push_back(w);
        v.push_back(3.0 * p.profile(w));  // unnormalized input
    }
    const auto t = PulseSpectrum::tabulated(om, v);
    EXPECT_NEAR(t.center(), 7.0, 1e-6);
    EXPECT_NEAR(t.bandwidth(), 1.0, 1e-4);
    EXPECT_NEAR(std::abs(t.profile(7.3) - p.profile(7.3)), 0.0, 1e-4);
    EXPECT_EQ(t.profile(100.0), cplx(0.0));
}

TEST(NormalizePhi, UnitNormAndCoupling) {
    const RamanResonance res;
    const auto spec = normalize_phi(res, PulseSpectrum(10.0, 1.0), PulseSpectrum(7.0, 1.0));
    EXPECT_NEAR(spec.g, 0.432676001067324, 1e-9);
    // re-integration by Simpson on the returned grid
    const std::size_t n = spec.omega.size();
    const double h = spec.omega[1] - spec.omega[0];
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double wgt = (i == 0 || i + 1 == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += wgt * std::norm(spec.phi[i]);
    }
    EXPECT_NEAR(acc * h / 3.0 / (2.0 * numerics::kPi), 1.0, 1e-6);
    EXPECT_NEAR(std::abs(spec.evaluate(spec.omega[n / 2]) - spec.phi[n / 2]), 0.0, 1e-9);
}

TEST(NormalizePhi, AmplitudeScaling) {
    const RamanResonance res;
    const PulseSpectrum pu(10.0, 1.0), st(7.0, 1.0);
    const double g0 = normalize_phi(res, pu, st, 1024).g;
    EXPECT_NEAR(normalize_phi(res, pu.with_amplitude(2.0), st, 1024).g / g0, 4.0, 4e-9);
    EXPECT_NEAR(normalize_phi(res, pu, st.with_amplitude(2.0), 1024).g / g0, 2.0, 2e-9);
    EXPECT_NEAR(normalize_phi(RamanResonance{3.0, 0.5, 3.0}, pu, st, 1024).g / g0, 3.0, 3e-9);
}

TEST(SpectralWeight, FarDetuningVanishes) {
    const RamanResonance res;
    const PulseSpectrum pu(10.0, 1.0), st(7.0, 1.0);
    const double c = anti_stokes_center(pu, st);
    const double peak = std::abs(spectral_weight(res, pu, st, c));
    EXPECT_LT(std::abs(spectral_weight(res, pu, st, c + 10.0 * combined_bandwidth(pu, st))), 1e-6 * peak);
}

TEST(SpectralWeight, BroadResonanceApproachesGaussianShape) {
    const PulseSpectrum pu(10.0, 1.0), st(7.0, 1.0);
    const RamanResonance res{3.0, 100.0, 1.0};
    const double c = anti_stokes_center(pu, st);
    const double peak = std::abs(spectral_weight(res, pu, st, c));
    for (double dw : {-2.0, -1.0, 0.5, 1.5}) {
        const double ratio = std::abs(spectral_weight(res, pu, st, c + dw)) / peak;
        EXPECT_NEAR(ratio / resonance_free_shape(pu, st, c + dw), 1.0, 0.01) << dw;
    }
}

TEST(SpectralWeight, NarrowResonanceMatchesDenseGrid) {
    const PulseSpectrum pu(10.0, 1.0), st(7.0, 1.0);
    const RamanResonance res{2.5, 0.01, 1.0};
    for (double omega : {12.0, 13.0, 14.5}) {
        const cplx a = spectral_weight(res, pu, st, omega);
        const cplx b = brute_force(res, pu, st, omega, 2e-4);
        EXPECT_NEAR(std::abs(a - b) / std::abs(a), 0.0, 0.01) << omega;
    }
}

TEST(SpectralWeight, MultipleResonancesAdd) {
    const PulseSpectrum pu(10.0, 1.0), st(7.0, 1.0);
    const RamanResonance r1{3.0, 0.5, 1.0}, r2{2.0, 0.3, 0.5};
    const cplx sum = spectral_weight(std::vector<RamanResonance>{r1, r2}, pu, st, 13.2);
    EXPECT_NEAR(std::abs(sum - spectral_weight(r1, pu, st, 13.2) - spectral_weight(r2, pu, st, 13.2)), 0.0, 1e-15);
    EXPECT_THROW(spectral_weight(RamanResonance{3.0, 0.0, 1.0}, pu, st, 13.0), std::invalid_argument);
}
