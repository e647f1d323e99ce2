#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nanonmr/estimate.hpp"
#include "nanonmr/fft.hpp"
#include "nanonmr/rng.hpp"
#include "test_helpers.hpp"

using namespace nanonmr;
using nanonmr::testing::rel_err;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi_v<double>;

PhotonTrace make_trace(std::vector<std::uint32_t> counts, double spacing)
{
    PhotonTrace t;
    t.counts = std::move(counts);
    t.spacing = spacing;
    return t;
}

// noiseless synthetic autocorrelation from a known model
AutocorrResult synthetic_ac(double amp, double delta, double t_d, EnvelopeKind kind,
                            double spacing, std::size_t n_lags,
                            const NuisanceDecay* nuisance = nullptr)
{
    AutocorrResult ac;
    ac.spacing = spacing;
    for (std::size_t k = 1; k <= n_lags; ++k) {
        const double t = static_cast<double>(k) * spacing;
        double v = amp * std::cos(delta * t)
                   * (kind == EnvelopeKind::PowerLawDiffusion ? envelope_power_law(t / t_d)
                                                              : envelope_exponential(t / t_d));
        if (nuisance)
            v += nuisance->amplitude * std::exp(-t / nuisance->t_exp) + nuisance->offset;
        ac.lags.push_back(t);
        ac.values.push_back(v);
        ac.n_pairs.push_back(1000);
    }
    return ac;
}

}  // namespace

TEST_CASE("autocorrelation basics")
{
    // constant trace: all-zero after mean subtraction
    const auto flat = make_trace(std::vector<std::uint32_t>(4000, 3), 1e-5);
    const AutocorrResult ac = autocorrelation(flat, 50e-5);
    CHECK(ac.lags.front() == doctest::Approx(1e-5));
    CHECK(ac.mean_subtracted);
    for (double v : ac.values)
        CHECK(std::abs(v) < 1e-12);

    // i.i.d. Poisson: nonzero lags within noise
    Rng rng(3);
    std::vector<std::uint32_t> counts(200000);
    for (auto& c : counts)
        c = rng.poisson(0.05);
    const auto iid = make_trace(std::move(counts), 1e-5);
    const AutocorrResult ac2 = autocorrelation(iid, 20e-5);
    const double se = 0.05 / std::sqrt(200000.0);
    for (double v : ac2.values)
        CHECK(std::abs(v) < 4.0 * se);

    // FFT equals the direct sum to 1e-10 relative on N = 1000
    Rng rng2(9);
    std::vector<double> x(1000);
    for (auto& v : x)
        v = rng2.normal();
    const auto rf = autocovariance_fft(x, 100);
    const auto rd = autocovariance_direct(x, 100);
    for (std::size_t k = 0; k <= 100; ++k)
        CHECK(std::abs(rf[k] - rd[k]) <= 1e-10 * std::abs(rd[0]));

    // Parseval: sum of squares equals the spectrum integral
    {
        const std::size_t n = x.size();
        double mean = 0.0;
        for (double v : x)
            mean += v;
        mean /= static_cast<double>(n);
        const std::size_t m = next_pow2(2 * n);
        std::vector<std::complex<double>> buf(m, {0.0, 0.0});
        for (std::size_t i = 0; i < n; ++i)
            buf[i] = {x[i] - mean, 0.0};
        fft_inplace(buf, false);
        double spec = 0.0;
        for (const auto& c : buf)
            spec += std::norm(c);
        spec /= static_cast<double>(m);
        double ssq = 0.0;
        for (double v : x)
            ssq += (v - mean) * (v - mean);
        CHECK(rel_err(spec, ssq) < 1e-8);
    }

    // preconditions
    const auto small = make_trace({1, 2, 1, 2, 1, 2, 1, 2}, 1e-5);
    CHECK_THROWS_AS(autocorrelation(small, 5e-5), std::invalid_argument);  // > N/2
    CHECK_THROWS_AS(autocorrelation(small, 0.5e-5), std::invalid_argument);  // < spacing
}

TEST_CASE("block slicing and grouping")
{
    Rng rng(17);
    std::vector<std::uint32_t> counts(40 * 500);
    for (auto& c : counts)
        c = rng.poisson(0.5);
    const auto trace = make_trace(std::move(counts), 1e-5);

    // 40 blocks, groups of 20: exactly 2 grouped autocorrelations
    const auto groups = slice_blocks(trace, 500e-5, 20, 50e-5);
    CHECK(groups.size() == 2);
    CHECK(groups[0].values.size() == groups[1].values.size());

    // group_size = 1 with the whole trace as one block reproduces
    // autocorrelation()
    const auto whole = slice_blocks(trace, trace.duration(), 1, 50e-5);
    CHECK(whole.size() == 1);
    const auto direct = autocorrelation(trace, 50e-5);
    for (std::size_t i = 0; i < direct.values.size(); ++i)
        CHECK(whole[0].values[i] == doctest::Approx(direct.values[i]).epsilon(1e-12));

    // fewer than one full group
    CHECK_THROWS_AS(slice_blocks(trace, trace.duration(), 2, 50e-5), std::invalid_argument);

    // concatenation mode: grouping 8 blocks of 500 is the same as one
    // 4000-sample block
    const auto concat =
        slice_blocks(trace, 500e-5, 8, 50e-5, GroupMode::ConcatenateBlocks);
    const auto big = slice_blocks(trace, 4000e-5, 1, 50e-5);
    CHECK(concat.size() == big.size());
    for (std::size_t g = 0; g < concat.size(); ++g)
        for (std::size_t i = 0; i < concat[g].values.size(); ++i)
            CHECK(concat[g].values[i] == doctest::Approx(big[g].values[i]).epsilon(1e-12));
}

TEST_CASE("group averaging reduces the noise floor by sqrt(group_size)")
{
    // ensemble of pure-noise traces: compare per-lag std dev of single-block
    // vs group-of-16 autocorrelations
    const int n_ensemble = 40;
    const std::size_t block = 2000;
    const int group = 16;
    std::vector<double> single_sq, grouped_sq;
    for (int e = 0; e < n_ensemble; ++e) {
        Rng rng(400 + e);
        std::vector<std::uint32_t> counts(block * group);
        for (auto& c : counts)
            c = rng.poisson(1.0);
        const auto trace = make_trace(std::move(counts), 1e-5);
        const auto singles = slice_blocks(trace, block * 1e-5, 1, 40e-5);
        const auto grouped = slice_blocks(trace, block * 1e-5, group, 40e-5);
        for (double v : singles[0].values)
            single_sq.push_back(v * v);
        for (double v : grouped[0].values)
            grouped_sq.push_back(v * v);
    }
    double s2 = 0.0, g2 = 0.0;
    for (double v : single_sq)
        s2 += v;
    for (double v : grouped_sq)
        g2 += v;
    s2 /= static_cast<double>(single_sq.size());
    g2 /= static_cast<double>(grouped_sq.size());
    // variance ratio ~ group (i.e. noise floor down by sqrt(group)); allow
    // a wide Monte Carlo band
    const double ratio = s2 / g2;
    CHECK(ratio > group * 0.6);
    CHECK(ratio < group * 1.5);
}

TEST_CASE("fit recovers exact model parameters on noiseless data")
{
    const double amp = 3.2e-4, delta = kTwoPi * 3200.0, t_d = 100e-6;
    const AutocorrResult ac =
        synthetic_ac(amp, delta, t_d, EnvelopeKind::PowerLawDiffusion, 25e-6, 120);
    const FitModelSpec spec =
        make_default_fit_spec(ac, EnvelopeKind::PowerLawDiffusion, false);
    const FitResult fit = fit_autocorrelation(ac, spec, 400, 99);
    REQUIRE(fit.converged);
    CHECK(rel_err(fit.amp(), amp) < 1e-6);
    CHECK(rel_err(fit.delta(), delta) < 1e-6);
    CHECK(rel_err(fit.t_d(), t_d) < 1e-6);
    CHECK(fit.r_squared > 1.0 - 1e-12);
}

TEST_CASE("fit with nuisance recovers delta within its standard error")
{
    const double amp = 2.0e-4, delta = kTwoPi * 2800.0, t_d = 100e-6;
    const NuisanceDecay nuisance{1.5e-4, 600e-6, 2e-5};
    AutocorrResult ac = synthetic_ac(amp, delta, t_d, EnvelopeKind::PowerLawDiffusion,
                                     25e-6, 150, &nuisance);
    // small deterministic perturbation so the asymptotic errors are finite
    Rng rng(5);
    for (auto& v : ac.values)
        v += 2e-6 * rng.normal();
    const FitModelSpec spec = make_default_fit_spec(ac, EnvelopeKind::PowerLawDiffusion, true);
    const FitResult fit = fit_autocorrelation(ac, spec, 200, 7);
    REQUIRE(fit.converged);
    const double err = std::max(fit.param_errors[1], 1e-3 * delta);
    CHECK(std::abs(fit.delta() - delta) < 3.0 * err);
}

TEST_CASE("fit against bounds is flagged")
{
    const double delta = kTwoPi * 3000.0;
    const AutocorrResult ac =
        synthetic_ac(1e-4, delta, 100e-6, EnvelopeKind::PowerLawDiffusion, 25e-6, 80);
    FitModelSpec spec = make_default_fit_spec(ac, EnvelopeKind::PowerLawDiffusion, false);
    spec.delta = {0.0, 0.5 * delta};  // exclude the truth
    const FitResult fit = fit_autocorrelation(ac, spec, 60, 3);
    bool any_bound = false;
    for (bool b : fit.at_bounds)
        any_bound = any_bound || b;
    CHECK(any_bound);

    CHECK_THROWS_AS(fit_autocorrelation(ac, spec, 0, 3), std::invalid_argument);
    AutocorrResult tiny = ac;
    tiny.lags.resize(5);
    tiny.values.resize(5);
    tiny.n_pairs.resize(5);
    CHECK_THROWS_AS(fit_autocorrelation(tiny, spec, 10, 3), std::invalid_argument);
}

TEST_CASE("fit determinism")
{
    AutocorrResult ac =
        synthetic_ac(1e-4, kTwoPi * 1500.0, 80e-6, EnvelopeKind::Exponential, 25e-6, 100);
    Rng rng(2);
    for (auto& v : ac.values)
        v += 1e-5 * rng.normal();
    const FitModelSpec spec = make_default_fit_spec(ac, EnvelopeKind::Exponential, false);
    const FitResult f1 = fit_autocorrelation(ac, spec, 50, 123);
    const FitResult f2 = fit_autocorrelation(ac, spec, 50, 123);
    CHECK(f1.params == f2.params);
    CHECK(f1.r_squared == f2.r_squared);
}

TEST_CASE("estimator distribution")
{
    // identical inputs: rmse vs ensemble mean is zero
    const AutocorrResult ac =
        synthetic_ac(1e-4, kTwoPi * 2000.0, 100e-6, EnvelopeKind::PowerLawDiffusion,
                     25e-6, 100);
    FitModelSpec spec =
        make_default_fit_spec(ac, EnvelopeKind::PowerLawDiffusion, false);
    // caller-provided search band around the coarse spectral estimate
    spec.delta = {0.5 * kTwoPi * 2000.0, 1.5 * kTwoPi * 2000.0};
    const std::vector<AutocorrResult> same{ac, ac, ac};
    const EstimatorStats stats = estimator_distribution(same, spec, 30, 17);
    CHECK(stats.n_failed == 0);
    CHECK(stats.estimates.size() == 3);
    CHECK(stats.rmse < 1e-6 * stats.mean);
    std::int64_t total = 0;
    for (auto c : stats.hist_counts)
        total += c;
    CHECK(total == static_cast<std::int64_t>(stats.estimates.size()));

    CHECK_THROWS_AS(estimator_distribution({ac}, spec, 10, 1), std::invalid_argument);
}

TEST_CASE("ensemble rmse shrinks ~2x when T grows 4x")
{
    // exponential envelope so a short fit window carries the information;
    // 16 traces per ensemble keeps the Monte Carlo band wide but usable
    const auto run_ensemble = [](std::int64_t n, std::uint64_t seed_base) {
        TraceConfig config;
        config.model.phi_rms = 0.5;
        config.model.delta = kTwoPi * 5000.0;
        config.model.t_d = 100e-6;
        config.model.kind = EnvelopeKind::Exponential;
        config.readout = {2.0, 0.5};
        config.timing = {10e-6, 15e-6, static_cast<double>(n) * 25e-6};
        config.n_measurements = n;

        std::vector<AutocorrResult> acs;
        for (int i = 0; i < 16; ++i) {
            TraceConfig cfg = config;
            cfg.seed = seed_base + static_cast<std::uint64_t>(i);
            acs.push_back(autocorrelation(simulate_qdyne_trace(cfg), 15.0 * config.model.t_d));
        }
        FitModelSpec spec = make_default_fit_spec(acs.front(), config.model.kind, false);
        spec.delta = {0.8 * config.model.delta, 1.2 * config.model.delta};
        const EstimatorStats stats =
            estimator_distribution(acs, spec, 80, 777, config.model.delta);
        return stats.rmse;
    };

    const double rmse_short = run_ensemble(25000, 5000);
    const double rmse_long = run_ensemble(100000, 6000);
    const double ratio = rmse_short / rmse_long;
    // expect ~2 with generous Monte Carlo slack (16 traces each)
    CHECK(ratio > 1.3);
    CHECK(ratio < 3.1);
}

TEST_CASE("fourier baseline")
{
    // pure cosine, no decay: peak at delta/2pi within one interpolated bin
    const double f0 = 2500.0;
    AutocorrResult ac;
    ac.spacing = 25e-6;
    for (std::size_t k = 1; k <= 512; ++k) {
        const double t = static_cast<double>(k) * ac.spacing;
        ac.lags.push_back(t);
        ac.values.push_back(std::cos(kTwoPi * f0 * t));
        ac.n_pairs.push_back(1);
    }
    const FourierBaseline fb = fourier_baseline(ac, 4);
    const double bin = 1.0 / (next_pow2(2 * 513 * 4) * ac.spacing);
    CHECK(std::abs(fb.peak_frequency - f0) < bin);

    // exponentially decaying cosine: FWHM ~ 1/(pi T_D) within 10%
    const double t_d = 2000e-6;
    AutocorrResult lor;
    lor.spacing = 25e-6;
    for (std::size_t k = 1; k <= 4096; ++k) {
        const double t = static_cast<double>(k) * lor.spacing;
        lor.lags.push_back(t);
        lor.values.push_back(std::cos(kTwoPi * f0 * t) * std::exp(-t / t_d));
        lor.n_pairs.push_back(1);
    }
    const FourierBaseline lb = fourier_baseline(lor, 8);
    CHECK(rel_err(2.0 * lb.half_fwhm, 1.0 / (std::numbers::pi_v<double> * t_d)) < 0.10);

    // flat spectrum: no peak -> error
    AutocorrResult flat;
    flat.spacing = 25e-6;
    for (std::size_t k = 1; k <= 64; ++k) {
        flat.lags.push_back(static_cast<double>(k) * flat.spacing);
        flat.values.push_back(0.0);
        flat.n_pairs.push_back(1);
    }
    CHECK_THROWS_AS(fourier_baseline(flat, 2), std::runtime_error);
}
