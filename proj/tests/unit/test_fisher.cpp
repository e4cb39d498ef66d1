#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cars/fisher.hpp"
#include "cars/numerics/optimize.hpp"
#include "cars/oracles.hpp"

using namespace cars;

namespace {

const GaussianPsf kPsf;

FisherInputs plane(double k, double s, double x0 = 0.0) {
    return fisher_inputs(PlaneWaveExcitation::from_ktilde(k), EmitterScene{s, x0, 1.0, 1.0}, kPsf);
}
FisherInputs vortex(double a, double psi, double s) {
    return fisher_inputs(VortexExcitation{a, psi}, EmitterScene{s, 0.0, 1.0, 1.0}, kPsf);
}

}  // namespace

TEST(Qfi, PlaneWaveValues) {
    EXPECT_EQ(qfi_separation(plane(1.0, 0.0).amps, plane(1.0, 0.0).geom).value, 0.0);
    EXPECT_NEAR(qfi_plane_normalized(0.0, 2.0), 1.0 + 3.0 * std::exp(-2.0), 1e-15);
    EXPECT_NEAR(qfi_plane_normalized(0.0, 10.0), 1.0, 1e-10);
    for (double k : {0.0, 2.0, 4.0}) EXPECT_EQ(qfi_plane_normalized(k, 0.0), 0.0);
    const auto in = plane(2.0, 1.0);
    EXPECT_NEAR(qfi_separation(in.amps, in.geom).normalized_value, qfi_plane_normalized(2.0, 1.0), 1e-10);
}

TEST(Qfi, ReportUnits) {
    const auto in = fisher_inputs(PlaneWaveExcitation::from_ktilde(1.0), EmitterScene{0.8, 0.0, 0.5, 0.9}, GaussianPsf{2.0});
    const auto r = qfi_separation(in.amps, in.geom);
    EXPECT_NEAR(r.normalized_value, r.value * 4.0 / (2.0 * 0.9 * 0.25), 1e-12);
    EXPECT_NEAR(r.normalized_value, qfi_plane_normalized(1.0, 0.8), 1e-10);
    EXPECT_EQ(r.method, FisherMethod::qfi_general);
}

TEST(Qfi, VortexClosedFormMatchesGeneralPath) {
    for (double a : {0.5, std::sqrt(0.5), 1.0, 1.7})
        for (double psi : {0.0, 0.2, 0.5})
            for (double s : {0.05, 0.5, 1.0, 2.0, 3.0}) {
                const auto in = vortex(a, psi, s);
                EXPECT_NEAR(qfi_vortex_normalized(a, psi, s), qfi_separation(in.amps, in.geom).normalized_value, 1e-9)
                    << a << " " << psi << " " << s;
            }
    EXPECT_NEAR(qfi_vortex_normalized(0.7, 0.0, 0.0), 0.0, 1e-15);
}

TEST(Qfi, RejectedVortexFormDiffers) {
    const double a = std::sqrt(0.5);
    EXPECT_GT(std::abs(candidate_forms::qfi_vortex_centered_normalized(a, 1.0) - qfi_vortex_normalized(a, 0.0, 1.0)), 1e-3);
}

TEST(Qfi, VortexPeakBelowOneWidth) {
    const auto grid = numerics::linspace(0.01, 3.0, 300);
    double best_s = 0.0, best = -1.0;
    for (double s : grid) {
        const double q = qfi_vortex_normalized(std::sqrt(0.5), 0.0, s);
        if (q > best) best = q, best_s = s;
    }
    EXPECT_GT(best, 0.0);
    EXPECT_GT(best_s, 0.0);
    EXPECT_LT(best_s, 1.0);
}

TEST(QfiMatrix, MatchesFieldOracle) {
    for (const Excitation& exc : {Excitation{PlaneWaveExcitation::from_ktilde(0.0)}, Excitation{PlaneWaveExcitation::from_ktilde(2.0)},
                                  Excitation{VortexExcitation{0.7, 0.0}}, Excitation{VortexExcitation{0.9, 0.3}}}) {
        const EmitterScene sc{1.0, 0.1, 1.0, 1.0};
        const auto in = fisher_inputs(exc, sc, kPsf);
        const auto q = qfi_matrix(in.amps, in.geom);
        const auto o = oracles::qfi_matrix_field(exc, sc, kPsf);
        EXPECT_NEAR(q.q_dd, o.q_dd, 1e-6 * std::max(1.0, std::abs(o.q_dd)));
        EXPECT_NEAR(q.q_x0x0, o.q_x0x0, 1e-6 * std::max(1.0, std::abs(o.q_x0x0)));
        EXPECT_NEAR(q.q_dx0, o.q_dx0, 1e-6 * std::max(1.0, std::abs(o.q_dx0)));
        EXPECT_EQ(q.q_dd, qfi_separation(in.amps, in.geom).value);
        EXPECT_GE(q.eigenvalues()[0], -1e-9);
    }
    const auto in = vortex(std::sqrt(0.5), 0.0, 1.0);
    EXPECT_TRUE(std::isfinite(qfi_matrix(in.amps, in.geom).q_dx0));
}

TEST(DirectImaging, IntensityProperties) {
    const auto v = vortex(std::sqrt(0.5), 0.0, 1.0);
    const auto field = intensity_profile(v.amps, kPsf, v.geom);
    for (double y : {-1.0, 0.0, 0.4}) EXPECT_NEAR(field({0.0, y}), 0.0, 1e-28);

    // k̃ = 0: I = κg²[u0²(r-r1) + u0²(r-r2) + 2u0u0]·(2 for the 2κg² prefactor)
    const auto p = plane(0.0, 1.0);
    const auto fp = intensity_profile(p.amps, kPsf, p.geom);
    const Point r{0.3, -0.2};
    const double u1 = kPsf.value({r.x + 0.5, r.y});
    const double u2 = kPsf.value({r.x - 0.5, r.y});
    EXPECT_NEAR(fp(r), (u1 + u2) * (u1 + u2), 1e-14);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ud(0.1, 2.5);
    for (int i = 0; i < 5; ++i) {
        const auto in = fisher_inputs(VortexExcitation{ud(rng), 0.2 * ud(rng)}, EmitterScene{ud(rng), 0.1, 1.0, 1.0}, kPsf);
        const auto f = intensity_profile(in.amps, kPsf, in.geom);
        const double total = numerics::integrate_2d([&](double x, double y) { return f({x, y}); },
                                                    direct_imaging_domain(in.amps.s, in.amps.x0, 1.0),
                                                    {1e-12, 1e-12, 30, 50'000'000})
                                 .value;
        EXPECT_NEAR(total, in.amps.total_photons(), 1e-8);
    }
}

TEST(DirectImaging, CollinearSaturatesQfi) {
    for (double s : {0.05, 0.5, 1.0, 2.0, 3.0}) {
        const auto in = plane(0.0, s);
        const double q = qfi_separation(in.amps, in.geom).value;
        EXPECT_NEAR(fi_direct(in.amps, kPsf, in.geom).value / q, 1.0, 1e-6) << s;
    }
}

TEST(DirectImaging, CenteredVortexSaturatesQfi) {
    for (double s : {0.2, 1.0, 2.5}) {
        const auto in = vortex(std::sqrt(0.5), 0.0, s);
        EXPECT_NEAR(fi_direct(in.amps, kPsf, in.geom).normalized_value / qfi_vortex_normalized(std::sqrt(0.5), 0.0, s), 1.0,
                    1e-6);
    }
}

TEST(DirectImaging, TiltedExcitationLosesInformation) {
    const auto in = plane(2.0, 1.0);
    EXPECT_LT(fi_direct(in.amps, kPsf, in.geom).value, 0.99 * qfi_separation(in.amps, in.geom).value);
    const auto v = vortex(std::sqrt(0.5), 0.3, 0.5);
    EXPECT_LT(fi_direct(v.amps, kPsf, v.geom).value, 0.99 * qfi_separation(v.amps, v.geom).value);
}

TEST(DirectImaging, SmallSeparationQuadraticLaw) {
    // w²F/(2κg²) → (3 + 2k̃² + k̃⁴) s²/2; at k̃ = 2 the s⁴ term is still 11% at s = 0.3
    const auto near = plane(2.0, 0.02);
    EXPECT_NEAR(fi_direct(near.amps, kPsf, near.geom).normalized_value / (0.02 * 0.02), 13.5, 0.005 * 13.5);
    const auto mid = plane(2.0, 0.3);
    EXPECT_NEAR(fi_direct(mid.amps, kPsf, mid.geom).normalized_value / (0.3 * 0.3), 12.0135, 1e-3);
}

TEST(Spade, CountParityAndConservation) {
    const auto p = plane(0.0, 1.3);
    for (int m = 1; m < 12; m += 2) EXPECT_EQ(mean_photons_plane_normalized(0.0, m, 1.3), 0.0);
    const auto v = vortex(0.8, 0.0, 1.3);
    for (int m = 0; m < 12; m += 2) EXPECT_NEAR(spade_counts(v.amps, v.geom, m).mean, 0.0, 1e-30);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    for (int i = 0; i < 10; ++i) {
        const double s = 3.0 * ud(rng);
        const auto in = i % 2 ? plane(4.0 * ud(rng), s) : vortex(0.4 + ud(rng), 0.3 * ud(rng), s);
        const HermiteGaussBasis basis(30);
        double sum = 0.0;
        for (int m = 0; m <= 30; ++m) sum += mean_photons_spade(in.amps, basis, in.geom, m);
        EXPECT_NEAR(sum, in.amps.total_photons(), 1e-10);
    }
    (void)p;
}

TEST(Spade, CountsMatchClosedForms) {
    for (double s : {0.4, 1.0, 2.7}) {
        const auto in = plane(1.5, s);
        const auto v = vortex(0.6, 0.2, s);
        for (int m = 0; m <= 12; ++m) {
            EXPECT_NEAR(spade_counts(in.amps, in.geom, m).mean / 2.0, mean_photons_plane_normalized(1.5, m, s), 1e-13);
            EXPECT_NEAR(spade_counts(v.amps, v.geom, m).mean / 2.0, mean_photons_vortex_normalized(0.6, 0.2, m, s), 1e-13);
        }
    }
}

TEST(Spade, CollinearClosedForm) {
    const HermiteGaussBasis basis(30);
    for (double s : {0.1, 1.0, 2.0, 3.0}) {
        const auto in = plane(0.0, s);
        EXPECT_NEAR(fi_spade(in.amps, basis, in.geom, 30).normalized_value, 1.0 + std::exp(-0.5 * s * s) * (s * s - 1.0), 1e-8);
    }
    const auto in = plane(0.0, 1.0);
    EXPECT_NEAR(fi_spade(in.amps, basis, in.geom, 30).normalized_value, 1.0, 1e-12);
}

TEST(Spade, VortexSaturatesQfiForAnyRow) {
    const HermiteGaussBasis basis(30);
    for (double psi : {0.0, 0.3})
        for (double s : {0.2, 1.0, 3.0}) {
            const auto in = vortex(std::sqrt(0.5), psi, s);
            EXPECT_NEAR(fi_spade(in.amps, basis, in.geom, 30).normalized_value, qfi_vortex_normalized(std::sqrt(0.5), psi, s),
                        1e-8);
        }
}

TEST(Spade, MonotoneInTruncation) {
    double prev = 0.0;
    for (int M : {5, 10, 15, 20, 25}) {
        const HermiteGaussBasis basis(M);
        const auto in = plane(2.0, 2.0);
        const double f = fi_spade(in.amps, basis, in.geom, M).normalized_value;
        EXPECT_GE(f, prev);
        prev = f;
        EXPECT_NEAR(fi_spade_plane_closed(2.0, 2.0, M).normalized_value, f, 1e-12);
    }
    EXPECT_THROW(fi_spade(plane(1, 1).amps, HermiteGaussBasis(5), plane(1, 1).geom, 6), std::out_of_range);
}

TEST(SmallSeparation, FittedCoefficients) {
    // half the published polynomials in units of w²F/(2κg²)
    struct Row {
        double k, di, qfi;
    };
    for (const Row r : {Row{0, 1.5, 1.5}, Row{1, 3.0, 5.0}, Row{2, 13.5, 21.5}}) {
        const auto c = small_s_coefficients(r.k);
        EXPECT_NEAR(c.c_di / r.di, 1.0, 5e-3) << r.k;
        EXPECT_NEAR(c.c_qfi / r.qfi, 1.0, 5e-3) << r.k;
        EXPECT_NEAR(c.c_spade / r.qfi, 1.0, 5e-3) << r.k;
    }
}

TEST(WaistOptimum, EnvelopeDominatesFixedWaist) {
    const auto grid = numerics::linspace(0.05, 3.0, 25);
    const auto opt = optimize_waist(0.0, grid);
    ASSERT_EQ(opt.size(), grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_GE(opt[i].qfi, qfi_vortex_normalized(std::sqrt(0.5), 0.0, grid[i]) - 1e-12);
        EXPECT_GT(opt[i].qfi, 0.0);
        EXPECT_NEAR(opt[i].qfi, qfi_vortex_normalized(opt[i].a, 0.0, grid[i]), 1e-9);
    }
    // Q*(s) is continuous; a*(s) follows one of two local maxima in a and switches branch once
    // on [0.2, 2] (near s = 1.38, from a ≈ 1.5 to a ≈ 0.49)
    const auto fine = optimize_waist(0.0, numerics::linspace(0.2, 2.0, 37));
    int switches = 0;
    for (std::size_t i = 1; i < fine.size(); ++i) {
        EXPECT_LT(std::abs(fine[i].qfi - fine[i - 1].qfi), 0.15);
        if (std::abs(fine[i].a - fine[i - 1].a) > 0.1) ++switches;
    }
    EXPECT_EQ(switches, 1);
    EXPECT_THROW(optimize_waist(0.0, grid, 1.0, 0.5), std::invalid_argument);
}
