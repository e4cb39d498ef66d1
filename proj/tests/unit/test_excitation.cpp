#include <gtest/gtest.h>

#include <cmath>

#include "cars/excitation.hpp"
#include "cars/numerics/optimize.hpp"

using namespace cars;

namespace {
const GaussianPsf kPsf;
}

TEST(EmissionAmplitude, PlaneWaveAtOrigin) {
    const auto a = emission_amplitude(PlaneWaveExcitation::from_ktilde(2.0), EmitterScene{1.0, 0.0, 0.7, 1.0}, {0, 0});
    EXPECT_NEAR(a.real(), 0.0, 1e-15);
    EXPECT_NEAR(a.imag(), -0.7, 1e-15);
}

TEST(EmissionAmplitude, VortexProfile) {
    const VortexExcitation v{0.6, 0.25};
    const EmitterScene sc{0.9, 0.0, 1.3, 1.0};
    const Point r2{0.45, 0.25};
    const complex expected = complex(0.0, -1.3) * v.n_st() * complex(0.45, 0.25) *
                             std::exp(-(0.45 * 0.45 + 0.25 * 0.25) / (0.6 * 0.6));
    const auto a = emission_amplitude(v, sc, r2);
    EXPECT_NEAR(std::abs(a - expected), 0.0, 1e-14);
    EXPECT_EQ(emission_amplitude(v, sc, {0, 0}), complex(0.0, 0.0));
}

TEST(ImageAmplitudes, PlaneWaveCoincidentEmitters) {
    for (double k : {0.0, 1.0, 4.0}) {
        const auto amps = image_amplitudes(PlaneWaveExcitation::from_ktilde(k), EmitterScene{0.0, 0.0, 1.0, 0.5}, kPsf);
        EXPECT_NEAR(std::abs(amps.alpha_plus - complex(0.0, -2.0 * std::sqrt(0.5))), 0.0, 1e-15);
        EXPECT_EQ(amps.alpha_minus, complex(0.0, 0.0));
    }
}

TEST(ImageAmplitudes, VortexCenteredRowIsPurelyAntisymmetric) {
    for (double s : {0.1, 1.0, 2.5})
        for (double a : {0.5, 1.0}) {
            const auto amps = image_amplitudes(VortexExcitation{a, 0.0}, EmitterScene{s, 0.0, 1.0, 1.0}, kPsf);
            EXPECT_NEAR(std::abs(amps.alpha_plus), 0.0, 1e-15);
            EXPECT_GT(std::abs(amps.alpha_minus), 0.0);
        }
}

TEST(ImageAmplitudes, PlaneWavePhotonNumber) {
    const auto amps = image_amplitudes(PlaneWaveExcitation::from_ktilde(0.0), EmitterScene{1.0, 0.0, 1.0, 1.0}, kPsf);
    EXPECT_NEAR(amps.total_photons(), 2.0 * (1.0 + std::exp(-0.5)), 1e-14);
    EXPECT_EQ(amps.provenance, AmplitudeProvenance::analytic);
}

TEST(ImageAmplitudes, DerivativesMatchFiniteDifferences) {
    const auto grid = numerics::linspace(0.1, 3.0, 30);
    for (double k : {0.0, 1.0, 2.0, 4.0}) {
        const auto r = amplitude_derivative_check(PlaneWaveExcitation::from_ktilde(k), EmitterScene{0.0, 0.2, 1.0, 1.0},
                                                  kPsf, grid);
        EXPECT_LT(r.max_deviation, 1e-6) << "ktilde " << k << " " << r.worst_component << " at s=" << r.worst_s;
    }
    for (double a : {0.5, std::sqrt(0.5), 1.0})
        for (double psi : {0.0, 0.1, 0.3}) {
            const auto r = amplitude_derivative_check(VortexExcitation{a, psi}, EmitterScene{0.0, 0.0, 1.0, 1.0}, kPsf, grid);
            EXPECT_LT(r.max_deviation, 1e-6) << a << " " << psi << " " << r.worst_component;
        }
}

TEST(ImageAmplitudes, CoincidenceEdgeUsesOneSidedDifference) {
    const auto r = amplitude_derivative_check(PlaneWaveExcitation::from_ktilde(2.0), EmitterScene{}, kPsf, {0.0});
    EXPECT_LT(r.max_deviation, 1e-6) << r.worst_component;
    const auto amps = image_amplitudes(PlaneWaveExcitation::from_ktilde(2.0), EmitterScene{}, kPsf);
    EXPECT_TRUE(std::isfinite(std::abs(amps.d_d_alpha_minus)));
}

TEST(ImageAmplitudes, GenericProfileReproducesVortex) {
    const VortexExcitation v{0.8, 0.2};
    GenericExcitation gen{[v](Point r) { return detail::profile_value(Excitation{v}, r); }, v.psi};
    const EmitterScene sc{1.1, 0.05, 1.0, 1.0};
    const auto a = image_amplitudes(v, sc, kPsf);
    const auto b = image_amplitudes(gen, sc, kPsf);
    EXPECT_EQ(b.provenance, AmplitudeProvenance::finite_difference);
    EXPECT_NEAR(std::abs(a.alpha_plus - b.alpha_plus), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(a.d_d_alpha_minus - b.d_d_alpha_minus), 0.0, 1e-8);
    EXPECT_NEAR(std::abs(a.d_x0_alpha_plus - b.d_x0_alpha_plus), 0.0, 1e-8);
}

TEST(ImageAmplitudes, RejectsInvalidScenes) {
    EXPECT_THROW(image_amplitudes(PlaneWaveExcitation{}, EmitterScene{-1.0}, kPsf), std::invalid_argument);
    EXPECT_THROW(image_amplitudes(PlaneWaveExcitation{}, EmitterScene{1.0, 0.0, 1.0, 1.5}, kPsf), std::invalid_argument);
    EXPECT_THROW(image_amplitudes(VortexExcitation{0.0}, EmitterScene{1.0}, kPsf), std::invalid_argument);
    EXPECT_THROW(image_amplitudes(GenericExcitation{}, EmitterScene{1.0}, kPsf), std::invalid_argument);
}

TEST(PlaneWaveExcitation, Ktilde) {
    PlaneWaveExcitation e;
    e.k_pu_x = 0.5;
    e.k_st_x = 3.0;
    EXPECT_DOUBLE_EQ(e.ktilde(), 2.0);
    EXPECT_TRUE(e.consistent_with(2.0));
    EXPECT_FALSE(e.consistent_with(2.1));
}
