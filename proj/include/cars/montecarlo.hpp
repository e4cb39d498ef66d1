#pragma once

// Poisson photon-count simulation and maximum-likelihood estimation of the separation,
// for SPADE (Hermite-Gauss mode counting) and binned direct imaging.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "cars/excitation.hpp"
#include "cars/fisher.hpp"
#include "cars/numerics/optimize.hpp"
#include "cars/parallel.hpp"
#include "cars/psf_modes.hpp"

namespace cars {

// ---------------------------------------------------------------------------
// Random numbers: SplitMix64 streams keyed by (seed, stream id)

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ull));
}

/// Counter-based generator: output i is splitmix64(key + i·γ). Satisfies UniformRandomBitGenerator.
class CounterRng {
public:
    using result_type = std::uint64_t;
    explicit CounterRng(std::uint64_t key) : key_(key) {}
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() { return splitmix64(key_ + 0x9E3779B97F4A7C15ull * counter_++); }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

struct CountRecord {
    int channel_id = 0;
    std::int64_t count = 0;
    double expected = 0.0;
};

/// Independent Poisson draws, one stream per channel.
inline std::vector<CountRecord> sample_counts(const std::vector<double>& expected, std::uint64_t seed) {
    std::vector<CountRecord> out;
    out.reserve(expected.size());
    for (std::size_t c = 0; c < expected.size(); ++c) {
        const double mean = expected[c];
        if (!(mean >= 0.0) || !std::isfinite(mean))
            throw std::invalid_argument("sample_counts: expectation of channel " + std::to_string(c) +
                                        " is negative or not finite");
        std::int64_t n = 0;
        if (mean > 0.0) {
            CounterRng rng(derive_seed(seed, c));
            std::poisson_distribution<std::int64_t> dist(mean);
            n = dist(rng);
        }
        out.push_back({static_cast<int>(c), n, mean});
    }
    return out;
}

class NonIdentifiableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Per-shot channel expectations as a function of s.
using ChannelModel = std::function<std::vector<double>(double)>;

/// Poisson log-likelihood of counts pooled over mu shots (constant terms dropped).
inline double poisson_log_likelihood(const std::vector<CountRecord>& records, const std::vector<double>& per_shot,
                                     double mu) {
    if (per_shot.size() != records.size()) throw std::invalid_argument("log-likelihood: channel count mismatch");
    double ll = 0.0;
    for (std::size_t c = 0; c < records.size(); ++c) {
        const double lambda = mu * per_shot[c];
        if (records[c].count > 0) {
            if (!(lambda > 0.0)) return -std::numeric_limits<double>::infinity();
            ll += static_cast<double>(records[c].count) * std::log(lambda);
        }
        ll -= lambda;
    }
    return ll;
}

struct SearchInterval {
    double lo = 0.0;
    double hi = 3.0;
};

/// argmax_s of the pooled Poisson likelihood: 256-point scan, then golden section on the
/// neighbours of the best sample. Ties go to the sample nearest the interval midpoint.
inline double ml_estimate(const std::vector<CountRecord>& records, const ChannelModel& model, double mu,
                          SearchInterval interval) {
    if (!(interval.hi > interval.lo)) throw std::invalid_argument("ml_estimate: empty search interval");
    const bool all_zero =
        std::all_of(records.begin(), records.end(), [](const CountRecord& r) { return r.count == 0; });
    if (all_zero) throw NonIdentifiableError("ml_estimate: all counts are zero, likelihood carries no information on s");
    const auto grid = numerics::linspace(interval.lo, interval.hi, 256);
    const double mid = 0.5 * (interval.lo + interval.hi);
    auto ll = [&](double s) { return poisson_log_likelihood(records, model(s), mu); };
    const auto best = numerics::scan_then_refine(ll, grid, 1e-9 * std::max(1.0, interval.hi - interval.lo),
                                                 [&](std::size_t i, std::size_t j) {
                                                     return std::abs(grid[i] - mid) < std::abs(grid[j] - mid);
                                                 });
    return best.x;
}

// ---------------------------------------------------------------------------
// Measurement models

/// Fixes the excitation, centroid, g and κ; varies s.
struct SceneTemplate {
    Excitation excitation = PlaneWaveExcitation{};
    EmitterScene scene{};
};

/// Coupling g giving `photons` mean photons per shot at the scene's separation.
inline double coupling_for_photons(const SceneTemplate& tpl, double photons) {
    EmitterScene sc = tpl.scene;
    sc.g = 1.0;
    const auto amps = image_amplitudes(tpl.excitation, sc, GaussianPsf{});
    const double n1 = amps.total_photons();
    if (!(n1 > 0.0)) throw NonIdentifiableError("coupling_for_photons: configuration emits no light");
    return std::sqrt(photons / n1);
}

/// SPADE: mean counts in HG modes 0..M centered on the known centroid.
class SpadeModel {
public:
    SpadeModel(SceneTemplate tpl, int M) : tpl_(std::move(tpl)), M_(M) {
        if (M < 0) throw std::invalid_argument("SpadeModel: M must be >= 0");
    }
    [[nodiscard]] std::vector<double> operator()(double s) const {
        EmitterScene sc = tpl_.scene;
        sc.s = std::max(s, 0.0);
        const auto in = fisher_inputs(tpl_.excitation, sc, GaussianPsf{});
        std::vector<double> out(static_cast<std::size_t>(M_) + 1);
        for (int m = 0; m <= M_; ++m) out[static_cast<std::size_t>(m)] = spade_counts(in.amps, in.geom, m).mean;
        return out;
    }
    [[nodiscard]] double fisher(double s) const {
        EmitterScene sc = tpl_.scene;
        sc.s = s;
        const auto in = fisher_inputs(tpl_.excitation, sc, GaussianPsf{});
        return fi_spade(in.amps, HermiteGaussBasis(M_), in.geom, M_).value;
    }
    [[nodiscard]] int channels() const { return M_ + 1; }

private:
    SceneTemplate tpl_;
    int M_;
};

/// Binned direct imaging: bins x bins pixels over the direct-imaging square of the true
/// separation; pixel expectations from closed-form erf integrals of the Gaussian PSF.
class BinnedImagingModel {
public:
    BinnedImagingModel(SceneTemplate tpl, double s_true, int bins = 32) : tpl_(std::move(tpl)), bins_(bins) {
        if (bins < 1) throw std::invalid_argument("BinnedImagingModel: bins must be >= 1");
        const auto dom = direct_imaging_domain(s_true, tpl_.scene.x0, 1.0);
        x_edges_ = numerics::linspace(dom.x_lo, dom.x_hi, static_cast<std::size_t>(bins) + 1);
        y_edges_ = numerics::linspace(dom.y_lo, dom.y_hi, static_cast<std::size_t>(bins) + 1);
    }

    [[nodiscard]] std::vector<double> operator()(double s) const {
        EmitterScene sc = tpl_.scene;
        sc.s = std::max(s, 0.0);
        const double row = detail::emitter_row(tpl_.excitation);
        const double xs[2] = {sc.x0 - 0.5 * sc.s, sc.x0 + 0.5 * sc.s};
        const complex amp[2] = {emission_amplitude(tpl_.excitation, sc, {xs[0], row}),
                                emission_amplitude(tpl_.excitation, sc, {xs[1], row})};
        // I = κ Σ_ij conj(α_i) α_j φ_i φ_j; each bin integral factorizes into x and y parts
        const auto y11 = pair_integrals(y_edges_, row, row);
        const auto x11 = pair_integrals(x_edges_, xs[0], xs[0]);
        const auto x22 = pair_integrals(x_edges_, xs[1], xs[1]);
        const auto x12 = pair_integrals(x_edges_, xs[0], xs[1]);
        const double c11 = std::norm(amp[0]);
        const double c22 = std::norm(amp[1]);
        const double c12 = 2.0 * std::real(std::conj(amp[0]) * amp[1]);
        std::vector<double> out(static_cast<std::size_t>(bins_ * bins_));
        for (int j = 0; j < bins_; ++j) {
            for (int i = 0; i < bins_; ++i) {
                const double xi = c11 * x11[i] + c22 * x22[i] + c12 * x12[i];
                out[static_cast<std::size_t>(j * bins_ + i)] = std::max(0.0, sc.kappa * xi * y11[j]);
            }
        }
        return out;
    }

    /// Fisher information of the binned counts, ∂ by central differences in s.
    [[nodiscard]] double fisher(double s) const {
        const double h = 1e-5;
        const auto n = (*this)(s);
        const auto up = (*this)(s + h);
        const auto dn = (*this)(std::max(0.0, s - h));
        const double span = s >= h ? 2.0 * h : h + s;
        double f = 0.0;
        for (std::size_t b = 0; b < n.size(); ++b) {
            const double d = (up[b] - dn[b]) / span;
            if (n[b] < 1e-300) continue;
            f += d * d / n[b];
        }
        return f;
    }
    [[nodiscard]] int channels() const { return bins_ * bins_; }

private:
    // ∫_bin φ(x-a) φ(x-b) dx with φ(x) = (2/π)^{1/4} e^{-x²} (w = 1)
    static std::vector<double> pair_integrals(const std::vector<double>& edges, double a, double b) {
        const double m = 0.5 * (a + b);
        const double pref = numerics::kSqrt2OverPi * std::exp(-0.5 * (a - b) * (a - b)) * std::sqrt(numerics::kPi / 8.0);
        std::vector<double> out(edges.size() - 1);
        double prev = std::erf(std::sqrt(2.0) * (edges[0] - m));
        for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
            const double next = std::erf(std::sqrt(2.0) * (edges[k + 1] - m));
            out[k] = pref * (next - prev);
            prev = next;
        }
        return out;
    }

    SceneTemplate tpl_;
    int bins_;
    std::vector<double> x_edges_;
    std::vector<double> y_edges_;
};

// ---------------------------------------------------------------------------
// Campaigns

enum class Measurement { spade, direct_imaging };

inline const char* to_string(Measurement m) { return m == Measurement::spade ? "spade" : "direct_imaging"; }

struct CampaignConfig {
    Measurement measurement = Measurement::spade;
    SceneTemplate tpl{};
    double photons_per_shot = 10.0;
    double mu = 1e4;
    int batches = 50;
    int estimates_per_batch = 40;
    int modes = 30;
    int bins = 32;       // starting pixel grid per axis
    int max_bins = 256;  // refinement cap for the 2% binned-FI check
    std::uint64_t seed = 1;
    SearchInterval interval{0.0, 0.0};  // empty: [max(0, s - 1), s + 1]
};

struct EstimationReport {
    double true_s = 0.0;
    std::vector<double> estimates;
    std::vector<double> batch_variances;
    double mean_estimate = 0.0;
    double empirical_variance = 0.0;
    double fisher = 0.0;             // per shot, for s (w = 1)
    double fisher_continuum = 0.0;   // continuous-detector value (direct imaging only)
    int bins = 0;                    // pixel grid per axis actually used (direct imaging only)
    double crb = 0.0;                // 1/(μ F)
    double ratio = 0.0;              // empirical_variance / crb
    double mu = 0.0;
    double photons_per_shot = 0.0;   // |α+|² + |α-|²
    double g = 0.0;
    std::uint64_t seed = 0;
    std::string measurement;
    int batches = 0;
    int estimates_per_batch = 0;
};

inline double sample_variance(const std::vector<double>& v, double* mean_out = nullptr) {
    if (v.size() < 2) return 0.0;
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    if (mean_out) *mean_out = mean;
    return ss / static_cast<double>(v.size() - 1);
}

/// Runs batches x estimates_per_batch independent μ-shot experiments and compares the
/// variance of the ML estimates with 1/(μF).
inline EstimationReport run_campaign(CampaignConfig cfg, unsigned workers = default_workers()) {
    cfg.tpl.scene.validate();
    if (!(cfg.mu >= 1.0)) throw std::invalid_argument("run_campaign: mu must be >= 1");
    if (cfg.batches < 1 || cfg.estimates_per_batch < 1) throw std::invalid_argument("run_campaign: empty campaign");
    const double s = cfg.tpl.scene.s;
    cfg.tpl.scene.g = coupling_for_photons(cfg.tpl, cfg.photons_per_shot);

    EstimationReport rep;
    rep.true_s = s;
    rep.mu = cfg.mu;
    rep.seed = cfg.seed;
    rep.g = cfg.tpl.scene.g;
    rep.measurement = to_string(cfg.measurement);
    rep.batches = cfg.batches;
    rep.estimates_per_batch = cfg.estimates_per_batch;
    rep.photons_per_shot = image_amplitudes(cfg.tpl.excitation, cfg.tpl.scene, GaussianPsf{}).total_photons();

    ChannelModel model;
    if (cfg.measurement == Measurement::spade) {
        SpadeModel m(cfg.tpl, cfg.modes);
        rep.fisher = s > 0.0 ? m.fisher(s) : 0.0;
        model = m;
    } else {
        // setup check: refine the pixel grid until the binned FI is within 2% of the continuum
        const auto in = fisher_inputs(cfg.tpl.excitation, cfg.tpl.scene, GaussianPsf{});
        rep.fisher_continuum = s > 0.0 ? fi_direct(in.amps, GaussianPsf{}, in.geom).value : 0.0;
        int bins = cfg.bins;
        BinnedImagingModel m(cfg.tpl, s, bins);
        rep.fisher = s > 0.0 ? m.fisher(s) : 0.0;
        while (rep.fisher < 0.98 * rep.fisher_continuum && bins < cfg.max_bins) {
            bins *= 2;
            m = BinnedImagingModel(cfg.tpl, s, bins);
            rep.fisher = m.fisher(s);
        }
        rep.bins = bins;
        model = m;
    }
    if (!(rep.fisher > 0.0))
        throw NonIdentifiableError("run_campaign: Fisher information vanishes at s = " + std::to_string(s) +
                                   "; the separation is not identifiable");
    rep.crb = 1.0 / (cfg.mu * rep.fisher);

    SearchInterval interval = cfg.interval;
    if (!(interval.hi > interval.lo)) interval = {std::max(0.0, s - 1.0), s + 1.0};
    const auto expected = model(s);
    std::vector<double> pooled(expected.size());
    for (std::size_t c = 0; c < expected.size(); ++c) pooled[c] = cfg.mu * expected[c];

    const std::size_t total = static_cast<std::size_t>(cfg.batches) * static_cast<std::size_t>(cfg.estimates_per_batch);
    // counts over μ shots: a sum of μ iid Poisson draws is one Poisson draw with mean μ N_c
    rep.estimates = parallel_map<double>(
        total,
        [&](std::size_t i) {
            const auto records = sample_counts(pooled, derive_seed(cfg.seed, i));
            return ml_estimate(records, model, cfg.mu, interval);
        },
        workers);

    rep.empirical_variance = sample_variance(rep.estimates, &rep.mean_estimate);
    rep.ratio = rep.empirical_variance / rep.crb;
    for (int b = 0; b < cfg.batches; ++b) {
        const auto first = rep.estimates.begin() + static_cast<std::ptrdiff_t>(b) * cfg.estimates_per_batch;
        rep.batch_variances.push_back(sample_variance(std::vector<double>(first, first + cfg.estimates_per_batch)));
    }
    return rep;
}

}  // namespace cars
