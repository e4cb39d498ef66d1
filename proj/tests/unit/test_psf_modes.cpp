#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cars/numerics/quadrature.hpp"
#include "cars/oracles.hpp"
#include "cars/psf_modes.hpp"

using namespace cars;

namespace {

double overlap(const HermiteGaussBasis& b, int j, int k) {
    return numerics::integrate_2d([&](double x, double y) { return hg_mode_value(b, j, {x, y}) * hg_mode_value(b, k, {x, y}); },
                                  numerics::Rect::square(9.0), {1e-11, 0.0, 30, 50'000'000})
        .value;
}

}  // namespace

TEST(GaussianPsf, NormalizedOnThePlane) {
    EXPECT_NEAR(psf_norm_squared(GaussianPsf{}, {1e-12, 0.0, 30, 50'000'000}), 1.0, 1e-10);
    EXPECT_NEAR(psf_norm_squared(GaussianPsf{2.5}, {1e-12, 0.0, 30, 50'000'000}), 1.0, 1e-10);
}

TEST(GaussianPsf, PeakAndSymmetry) {
    const GaussianPsf psf;
    // sqrt(2/π) for the plane-normalized Gaussian (w = 1)
    EXPECT_NEAR(psf.value({0, 0}), 0.79788456080286536, 1e-15);
    EXPECT_DOUBLE_EQ(psf.value({0.3, -0.7}), psf.value({-0.3, -0.7}));
    EXPECT_DOUBLE_EQ(psf.value({0.3, -0.7}), psf.value({0.3, 0.7}));
    EXPECT_THROW(GaussianPsf{0.0}, std::invalid_argument);
}

TEST(NumericPsf, SampledGaussianMatchesEvaluator) {
    const GaussianPsf g(1.3);
    const auto n = NumericPsf::from(g);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 100; ++i) {
        const Point r{u(rng), u(rng)};
        EXPECT_NEAR(n.value(r), g.value(r), 1e-12);
        EXPECT_NEAR(n.grad_x(r), g.grad_x(r), 1e-9);
    }
    EXPECT_THROW(NumericPsf({}, 1.0), std::invalid_argument);
}

TEST(HermiteGauss, LowOrderValues) {
    const HermiteGaussBasis b(5);
    const Point r{0.4, -0.2};
    EXPECT_DOUBLE_EQ(hg_mode_value(b, 0, r), GaussianPsf{}.value(r));
    EXPECT_DOUBLE_EQ(hg_mode_value(b, 1, {0.0, 0.8}), 0.0);
    // u_3 = H_3(√2 x)/sqrt(8·6) u0
    const double xi = std::sqrt(2.0) * r.x;
    EXPECT_NEAR(hg_mode_value(b, 3, r), (8 * xi * xi * xi - 12 * xi) / std::sqrt(48.0) * GaussianPsf{}.value(r), 1e-14);
    EXPECT_THROW(hg_mode_value(b, 6, r), std::out_of_range);
}

TEST(HermiteGauss, Orthonormal) {
    const HermiteGaussBasis b(4);
    for (int j = 0; j <= 4; ++j)
        for (int k = j; k <= 4; ++k) EXPECT_NEAR(overlap(b, j, k), j == k ? 1.0 : 0.0, 1e-9) << j << "," << k;
}

TEST(GammaK, ClosedFormAndQuadrature) {
    EXPECT_DOUBLE_EQ(gamma_k(0, 0.0), 1.0);
    EXPECT_NEAR(gamma_k(1, 2.0), std::exp(-0.5), 1e-15);
    const HermiteGaussBasis b(3);
    const GaussianPsf psf;
    const double s = 1.0;
    const double q = numerics::integrate_2d(
                         [&](double x, double y) { return hg_mode_value(b, 3, {x, y}) * psf.value({x - 0.5 * s, y}); },
                         numerics::Rect::square(9.0), {1e-12, 0.0, 30, 50'000'000})
                         .value;
    EXPECT_NEAR(gamma_k(3, s), q, 1e-9);
    // large-k log-space branch continues the small-k branch
    EXPECT_NEAR(gamma_k(21, 3.0) / gamma_k(20, 3.0), 1.5 / std::sqrt(21.0), 1e-12);
}

TEST(GammaK, CompletenessAndDerivative) {
    for (double s : {0.5, 1.0, 3.0}) {
        double sum = 0.0;
        for (int k = 0; k <= 60; ++k) sum += gamma_k(k, s) * gamma_k(k, s);
        EXPECT_NEAR(sum, 1.0, 1e-12);
    }
    const double h = 1e-6;
    for (int k : {0, 1, 4})
        EXPECT_NEAR(gamma_k_derivative(k, 1.2), (gamma_k(k, 1.2 + h) - gamma_k(k, 1.2 - h)) / (2 * h), 1e-8);
}

TEST(Geometry, GaussianClosedForms) {
    const auto g0 = gaussian_geometry(0.0);
    EXPECT_DOUBLE_EQ(g0.delta, 1.0);
    EXPECT_DOUBLE_EQ(g0.dk2, 1.0);
    EXPECT_DOUBLE_EQ(g0.beta, 1.0);  // defining integral: +1/w² at coincidence
    const auto g1 = gaussian_geometry(1.0);
    EXPECT_NEAR(g1.delta, 0.60653065971263342, 1e-15);
    EXPECT_NEAR(g1.beta, 0.0, 1e-16);
    double prev = 2.0;
    for (double s = 0.0; s < 4.0; s += 0.25) {
        const double d = gaussian_geometry(s).delta;
        EXPECT_LT(d, prev);
        prev = d;
    }
    const auto g10 = gaussian_geometry(10.0);
    EXPECT_NEAR(g10.xi_plus2, 1.0, 1e-8);
    EXPECT_NEAR(g10.xi_minus2, 1.0, 1e-8);
}

TEST(Geometry, SmallSeparationIsContinuous) {
    // Taylor branch below kSmallSeparation joins the closed forms
    const auto lo = gaussian_geometry(0.999e-3);
    const auto hi = gaussian_geometry(1.001e-3);
    EXPECT_NEAR(lo.eta_plus2 / hi.eta_plus2, 1.0, 1e-2);
    EXPECT_NEAR(lo.eta_minus2 / hi.eta_minus2, 1.0, 1e-2);
    EXPECT_NEAR(lo.mode_coupling, hi.mode_coupling, 1e-6);
    EXPECT_NEAR(lo.xi_minus2, hi.xi_minus2, 1e-9);
    EXPECT_NEAR(hi.eta_plus2 / (1.001e-3 * 1.001e-3), 1.0 / 8.0, 1e-6);
    EXPECT_NEAR(hi.eta_minus2 / (1.001e-3 * 1.001e-3), 1.0 / 24.0, 1e-6);
}

TEST(Geometry, ClosedFormsMatchDerivativeModeQuadrature) {
    const GaussianPsf psf;
    for (double s : {0.3, 1.5, 2.5}) {
        const auto g = psf_geometry(psf, s);
        const auto o = oracles::mode_norms(psf, s);
        EXPECT_NEAR(g.eta_plus2, o.eta_plus2, 1e-7) << s;
        EXPECT_NEAR(g.eta_minus2, o.eta_minus2, 1e-7) << s;
        EXPECT_NEAR(g.xi_plus2, o.xi_plus2, 1e-7) << s;
        EXPECT_NEAR(g.xi_minus2, o.xi_minus2, 1e-7) << s;
        EXPECT_NEAR(g.beta, o.beta, 1e-9) << s;
        EXPECT_NEAR(g.delta, o.delta, 1e-10) << s;
        EXPECT_GT(g.eta_minus2, 0.0);
    }
}

TEST(Geometry, SampledPsfAgreesWithClosedForms) {
    const auto n = NumericPsf::from(GaussianPsf{});
    for (double s : {0.4, 1.7}) {
        const auto a = psf_geometry(n, s);
        const auto b = gaussian_geometry(s);
        EXPECT_NEAR(a.delta, b.delta, 1e-9);
        EXPECT_NEAR(a.beta, b.beta, 1e-8);
        EXPECT_NEAR(a.delta_prime, b.delta_prime, 1e-8);
        EXPECT_NEAR(a.dk2, b.dk2, 1e-8);
        EXPECT_NEAR(a.eta_plus2, b.eta_plus2, 1e-7);
        EXPECT_NEAR(a.eta_minus2, b.eta_minus2, 1e-7);
    }
    EXPECT_THROW(psf_geometry(n, 1e-4), std::domain_error);
}

TEST(Geometry, ImageModesAreOrthonormal) {
    const GaussianPsf psf;
    const auto g = psf_geometry(psf, 0.8);
    auto integrate = [&](auto f) {
        return numerics::integrate_2d([&](double x, double y) { return f(image_modes(psf, g, 0.1, {x, y})); },
                                      numerics::Rect::square(9.0), {1e-11, 0.0, 30, 50'000'000})
            .value;
    };
    EXPECT_NEAR(integrate([](const ModeValues& m) { return m.u_plus * m.u_plus; }), 1.0, 1e-9);
    EXPECT_NEAR(integrate([](const ModeValues& m) { return m.u_minus * m.u_minus; }), 1.0, 1e-9);
    EXPECT_NEAR(integrate([](const ModeValues& m) { return m.u_plus * m.u_minus; }), 0.0, 1e-9);
    EXPECT_NEAR(integrate([](const ModeValues& m) { return m.d_u_plus * m.d_u_plus; }), g.eta_plus2, 1e-8);
}
