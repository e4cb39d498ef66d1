#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "cars/montecarlo.hpp"

using namespace cars;

namespace {

SceneTemplate vortex_template(double s) {
    return {VortexExcitation{std::sqrt(0.5), 0.0}, EmitterScene{s, 0.0, 1.0, 1.0}};
}

}  // namespace

TEST(SampleCounts, ZeroExpectationGivesZeroCounts) {
    for (const auto& r : sample_counts({0.0, 0.0, 0.0}, 5)) EXPECT_EQ(r.count, 0);
    EXPECT_THROW(sample_counts({1.0, -0.1}, 5), std::invalid_argument);
}

TEST(SampleCounts, PoissonMean) {
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += static_cast<double>(sample_counts({4.0}, derive_seed(9, i)).front().count);
    EXPECT_NEAR(sum / n, 4.0, 3.0 * std::sqrt(4.0 / n));
}

TEST(SampleCounts, Deterministic) {
    const auto a = sample_counts({3.0, 10.0, 0.5}, 42);
    const auto b = sample_counts({3.0, 10.0, 0.5}, 42);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].count, b[i].count);
    EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}

TEST(MlEstimate, NoiseFreeCountsRecoverTruth) {
    const auto tpl = vortex_template(1.0);
    const SpadeModel model(tpl, 20);
    const double mu = 1e6;
    std::vector<CountRecord> records;
    const auto expected = model(1.0);
    // counts set to the rounded expectation: the likelihood peaks at the truth up to rounding
    for (std::size_t c = 0; c < expected.size(); ++c)
        records.push_back({static_cast<int>(c), std::llround(mu * expected[c]), mu * expected[c]});
    EXPECT_NEAR(ml_estimate(records, model, mu, {0.0, 2.0}), 1.0, 1e-4);
}

TEST(MlEstimate, AllZeroCountsAreNotIdentifiable) {
    const SpadeModel model(vortex_template(1.0), 5);
    std::vector<CountRecord> zeros(6);
    EXPECT_THROW(ml_estimate(zeros, model, 10.0, {0.0, 2.0}), NonIdentifiableError);
}

TEST(Models, SpadeFisherMatchesDirectEvaluation) {
    const auto tpl = vortex_template(1.0);
    const SpadeModel model(tpl, 30);
    const auto in = fisher_inputs(tpl.excitation, tpl.scene, GaussianPsf{});
    EXPECT_NEAR(model.fisher(1.0), qfi_separation(in.amps, in.geom).value, 1e-8);
}

TEST(Models, BinnedImagingConservesPhotons) {
    const SceneTemplate tpl{PlaneWaveExcitation::from_ktilde(2.0), EmitterScene{1.0, 0.0, 1.0, 1.0}};
    const BinnedImagingModel model(tpl, 1.0, 64);
    const auto counts = model(1.0);
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    EXPECT_NEAR(total, image_amplitudes(tpl.excitation, tpl.scene, GaussianPsf{}).total_photons(), 1e-10);
    const auto in = fisher_inputs(tpl.excitation, tpl.scene, GaussianPsf{});
    const double continuum = fi_direct(in.amps, GaussianPsf{}, in.geom).value;
    EXPECT_LE(model.fisher(1.0), continuum * (1.0 + 1e-6));
    EXPECT_GT(BinnedImagingModel(tpl, 1.0, 128).fisher(1.0), 0.98 * continuum);
}

TEST(Campaign, VortexSpadeReachesCramerRao) {
    CampaignConfig cfg;
    cfg.tpl = vortex_template(1.0);
    cfg.batches = 25;
    cfg.estimates_per_batch = 40;
    cfg.seed = 3;
    const auto rep = run_campaign(cfg);
    EXPECT_NEAR(rep.photons_per_shot, 10.0, 1e-9);
    EXPECT_EQ(rep.estimates.size(), 1000u);
    EXPECT_EQ(rep.batch_variances.size(), 25u);
    EXPECT_GT(rep.ratio, 0.85);
    EXPECT_LT(rep.ratio, 1.15);
    EXPECT_NEAR(rep.mean_estimate, 1.0, 0.01);
}

TEST(Campaign, NearDegeneratePlaneWave) {
    CampaignConfig cfg;
    cfg.tpl = {PlaneWaveExcitation::from_ktilde(0.0), EmitterScene{0.2, 0.0, 1.0, 1.0}};
    cfg.batches = 20;
    cfg.estimates_per_batch = 40;
    cfg.seed = 5;
    const auto rep = run_campaign(cfg);
    EXPECT_GE(rep.ratio, 0.9);
    EXPECT_LE(rep.ratio, 2.0);
}

TEST(Campaign, SameSeedSameEstimates) {
    CampaignConfig cfg;
    cfg.tpl = vortex_template(0.8);
    cfg.batches = 2;
    cfg.estimates_per_batch = 10;
    const auto a = run_campaign(cfg, 1);
    const auto b = run_campaign(cfg, 3);
    EXPECT_EQ(a.estimates, b.estimates);
}

TEST(Campaign, DirectImagingRefinesPixelGrid) {
    CampaignConfig cfg;
    cfg.measurement = Measurement::direct_imaging;
    cfg.tpl = {PlaneWaveExcitation::from_ktilde(2.0), EmitterScene{1.0, 0.0, 1.0, 1.0}};
    cfg.batches = 2;
    cfg.estimates_per_batch = 10;
    const auto rep = run_campaign(cfg);
    EXPECT_GE(rep.fisher, 0.98 * rep.fisher_continuum);
    EXPECT_GT(rep.bins, 32);
}

TEST(Campaign, ZeroSeparationIsNotIdentifiable) {
    CampaignConfig cfg;
    cfg.tpl = {PlaneWaveExcitation::from_ktilde(1.0), EmitterScene{0.0, 0.0, 1.0, 1.0}};
    EXPECT_THROW(run_campaign(cfg), NonIdentifiableError);
}

TEST(Parallel, IndexOrderedAndRethrowsLowestIndex) {
    const auto v = parallel_map<int>(100, [](std::size_t i) { return static_cast<int>(i * i); }, 4);
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], static_cast<int>(i * i));
    try {
        parallel_map<int>(50, [](std::size_t i) -> int {
            if (i % 7 == 3) throw std::runtime_error(std::to_string(i));
            return 0;
        }, 4);
        FAIL();
    } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "3");
    }
}
