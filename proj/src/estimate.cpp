#include "nanonmr/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "nanonmr/fft.hpp"
#include "nanonmr/levmar.hpp"
#include "nanonmr/rng.hpp"

namespace nanonmr {

namespace {

double envelope_value(EnvelopeKind kind, double z)
{
    return kind == EnvelopeKind::PowerLawDiffusion ? envelope_power_law(z)
                                                   : envelope_exponential(z);
}

double fit_model_value(const FitModelSpec& spec, const std::vector<double>& p, double t)
{
    double v = p[0] * std::cos(p[1] * t) * envelope_value(spec.envelope, t / p[2]);
    if (spec.include_nuisance)
        v += p[3] * std::exp(-t / p[4]) + p[5];
    return v;
}

}  // namespace

AutocorrResult autocorrelation(const PhotonTrace& trace, double max_lag)
{
    const std::size_t n = trace.counts.size();
    if (n < 4)
        throw std::invalid_argument("autocorrelation: trace too short");
    if (!(trace.spacing > 0.0))
        throw std::invalid_argument("autocorrelation: bad spacing");
    // tolerate the last-ulp of duration/spacing ratios
    const auto max_k =
        static_cast<std::size_t>(std::floor(max_lag / trace.spacing + 1e-9));
    if (max_k < 1)
        throw std::invalid_argument("autocorrelation: max_lag below one spacing");
    if (max_k > n / 2)
        throw std::invalid_argument("autocorrelation: max_lag exceeds half the trace");

    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = static_cast<double>(trace.counts[i]);
    const std::vector<double> r = autocovariance_fft(x, max_k);

    AutocorrResult out;
    out.spacing = trace.spacing;
    out.lags.resize(max_k);
    out.values.resize(max_k);
    out.n_pairs.resize(max_k);
    for (std::size_t k = 1; k <= max_k; ++k) {
        out.lags[k - 1] = static_cast<double>(k) * trace.spacing;
        out.values[k - 1] = r[k];
        out.n_pairs[k - 1] = static_cast<std::int64_t>(n - k);
    }
    return out;
}

std::vector<AutocorrResult> slice_blocks(const PhotonTrace& trace,
                                         double block_duration,
                                         int group_size,
                                         double max_lag,
                                         GroupMode mode)
{
    if (group_size < 1)
        throw std::invalid_argument("slice_blocks: group_size must be >= 1");
    const auto n_per_block =
        static_cast<std::size_t>(std::floor(block_duration / trace.spacing + 1e-9));
    if (n_per_block < 4)
        throw std::invalid_argument("slice_blocks: block_duration too short");
    const std::size_t n_blocks = trace.counts.size() / n_per_block;
    const std::size_t n_groups = n_blocks / static_cast<std::size_t>(group_size);
    if (n_groups < 1)
        throw std::invalid_argument("slice_blocks: fewer than one full group");

    std::vector<AutocorrResult> groups;
    groups.reserve(n_groups);
    for (std::size_t g = 0; g < n_groups; ++g) {
        if (mode == GroupMode::ConcatenateBlocks) {
            PhotonTrace joined;
            joined.spacing = trace.spacing;
            joined.meta = trace.meta;
            const std::size_t begin = g * group_size * n_per_block;
            joined.counts.assign(trace.counts.begin() + begin,
                                 trace.counts.begin() + begin
                                     + static_cast<std::size_t>(group_size) * n_per_block);
            groups.push_back(autocorrelation(joined, max_lag));
            continue;
        }
        AutocorrResult acc;
        for (int b = 0; b < group_size; ++b) {
            const std::size_t block = g * group_size + b;
            PhotonTrace piece;
            piece.spacing = trace.spacing;
            piece.meta = trace.meta;
            piece.counts.assign(trace.counts.begin() + block * n_per_block,
                                trace.counts.begin() + (block + 1) * n_per_block);
            AutocorrResult ac = autocorrelation(piece, max_lag);
            if (b == 0) {
                acc = std::move(ac);
            } else {
                for (std::size_t i = 0; i < acc.values.size(); ++i) {
                    acc.values[i] += ac.values[i];
                    acc.n_pairs[i] += ac.n_pairs[i];
                }
            }
        }
        for (auto& v : acc.values)
            v /= group_size;
        groups.push_back(std::move(acc));
    }
    return groups;
}

FitModelSpec make_default_fit_spec(const AutocorrResult& ac,
                                   EnvelopeKind envelope,
                                   bool include_nuisance)
{
    if (ac.values.empty())
        throw std::invalid_argument("make_default_fit_spec: empty autocorrelation");
    double max_abs = 0.0;
    const std::size_t near = std::min<std::size_t>(ac.values.size(), 16);
    for (std::size_t i = 0; i < near; ++i)
        max_abs = std::max(max_abs, std::abs(ac.values[i]));
    if (max_abs == 0.0)
        max_abs = 1e-12;

    FitModelSpec spec;
    spec.envelope = envelope;
    spec.include_nuisance = include_nuisance;
    // the envelope may already have decayed substantially at the first lag,
    // so the amplitude headroom over max|ac| must be generous
    spec.amp = {0.0, 10.0 * max_abs};
    spec.delta = {0.0, std::numbers::pi_v<double> / ac.spacing};  // Nyquist band
    spec.t_d = {ac.spacing, ac.lags.back()};
    spec.nuisance_amp = {-4.0 * max_abs, 4.0 * max_abs};
    spec.nuisance_t_exp = {ac.spacing, 10.0 * ac.lags.back()};
    spec.nuisance_offset = {-4.0 * max_abs, 4.0 * max_abs};
    return spec;
}

FitResult fit_autocorrelation(const AutocorrResult& ac,
                              const FitModelSpec& spec,
                              int n_starts,
                              std::uint64_t seed)
{
    if (ac.values.size() < 10)
        throw std::invalid_argument("fit_autocorrelation: need at least 10 lags");
    if (n_starts < 1)
        throw std::invalid_argument("fit_autocorrelation: n_starts must be >= 1");

    const std::size_t np = spec.n_params();
    std::vector<double> lo{spec.amp.lower, spec.delta.lower, spec.t_d.lower};
    std::vector<double> hi{spec.amp.upper, spec.delta.upper, spec.t_d.upper};
    if (spec.include_nuisance) {
        lo.insert(lo.end(), {spec.nuisance_amp.lower, spec.nuisance_t_exp.lower,
                             spec.nuisance_offset.lower});
        hi.insert(hi.end(), {spec.nuisance_amp.upper, spec.nuisance_t_exp.upper,
                             spec.nuisance_offset.upper});
    }
    for (std::size_t j = 0; j < np; ++j)
        if (!(lo[j] < hi[j]) || !std::isfinite(lo[j]) || !std::isfinite(hi[j]))
            throw std::invalid_argument("fit_autocorrelation: bad parameter bounds");

    const std::size_t n = ac.values.size();
    const ResidualFn residuals = [&](const std::vector<double>& p, std::vector<double>& r) {
        for (std::size_t i = 0; i < n; ++i)
            r[i] = fit_model_value(spec, p, ac.lags[i]) - ac.values[i];
    };

    double ss_tot = 0.0;
    {
        double mean = 0.0;
        for (double v : ac.values)
            mean += v;
        mean /= static_cast<double>(n);
        for (double v : ac.values)
            ss_tot += (v - mean) * (v - mean);
    }
    if (ss_tot == 0.0)
        ss_tot = 1e-300;

    Rng rng(seed);
    LMResult best;
    bool have_converged = false;
    double best_r2 = -std::numeric_limits<double>::infinity();
    LMResult best_any;
    double best_any_ssr = std::numeric_limits<double>::infinity();

    for (int s = 0; s < n_starts; ++s) {
        std::vector<double> p0(np);
        for (std::size_t j = 0; j < np; ++j)
            p0[j] = lo[j] + (hi[j] - lo[j]) * rng.uniform();
        const LMResult fit = levenberg_marquardt(residuals, n, p0, lo, hi);
        if (fit.ssr < best_any_ssr) {
            best_any_ssr = fit.ssr;
            best_any = fit;
        }
        if (fit.converged) {
            const double r2 = 1.0 - fit.ssr / ss_tot;
            if (r2 > best_r2) {
                best_r2 = r2;
                best = fit;
                have_converged = true;
            }
        }
    }

    const LMResult& chosen = have_converged ? best : best_any;
    FitResult out;
    out.params = chosen.params;
    out.converged = have_converged;
    out.n_iterations = chosen.iterations;
    out.r_squared = 1.0 - chosen.ssr / ss_tot;
    out.param_errors.resize(np, 0.0);
    if (!chosen.variances.empty())
        for (std::size_t j = 0; j < np; ++j)
            out.param_errors[j] = std::sqrt(chosen.variances[j]);
    out.at_bounds.resize(np);
    for (std::size_t j = 0; j < np; ++j) {
        const double span = hi[j] - lo[j];
        out.at_bounds[j] = (chosen.params[j] - lo[j] < 1e-9 * span)
                           || (hi[j] - chosen.params[j] < 1e-9 * span);
    }
    return out;
}

EstimatorStats estimator_distribution(const std::vector<AutocorrResult>& grouped_acs,
                                      const FitModelSpec& spec,
                                      int n_starts,
                                      std::uint64_t seed,
                                      std::optional<double> reference_delta)
{
    if (grouped_acs.size() < 2)
        throw std::invalid_argument("estimator_distribution: need >= 2 autocorrelations");

    EstimatorStats stats;
    for (std::size_t i = 0; i < grouped_acs.size(); ++i) {
        try {
            const FitResult fit = fit_autocorrelation(grouped_acs[i], spec, n_starts,
                                                      split_seed(seed, i + 1));
            if (!fit.converged) {
                ++stats.n_failed;
                continue;
            }
            stats.estimates.push_back(fit.delta());
        } catch (const std::exception&) {
            ++stats.n_failed;
        }
    }
    if (stats.estimates.empty())
        throw std::runtime_error("estimator_distribution: no fit converged");

    const double n = static_cast<double>(stats.estimates.size());
    for (double d : stats.estimates)
        stats.mean += d;
    stats.mean /= n;
    const double ref = reference_delta ? *reference_delta : stats.mean;
    double msq = 0.0;
    for (double d : stats.estimates)
        msq += (d - ref) * (d - ref);
    stats.rmse = std::sqrt(msq / n);

    // Freedman-Diaconis bins
    std::vector<double> sorted = stats.estimates;
    std::sort(sorted.begin(), sorted.end());
    const auto quantile = [&](double q) {
        const double pos = q * (n - 1.0);
        const auto i = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(i);
        return (i + 1 < sorted.size()) ? sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
                                       : sorted[i];
    };
    const double iqr = quantile(0.75) - quantile(0.25);
    const double lo = sorted.front(), hi = sorted.back();
    double width = 2.0 * iqr / std::cbrt(n);
    std::size_t n_bins = 1;
    if (width > 0.0 && hi > lo)
        n_bins = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil((hi - lo) / width)));
    n_bins = std::min<std::size_t>(n_bins, 1000);
    const double span = (hi > lo) ? (hi - lo) : 1.0;
    stats.hist_edges.resize(n_bins + 1);
    for (std::size_t b = 0; b <= n_bins; ++b)
        stats.hist_edges[b] = lo + span * static_cast<double>(b) / static_cast<double>(n_bins);
    stats.hist_counts.assign(n_bins, 0);
    for (double d : sorted) {
        auto b = static_cast<std::size_t>((d - lo) / span * static_cast<double>(n_bins));
        if (b >= n_bins)
            b = n_bins - 1;
        ++stats.hist_counts[b];
    }
    return stats;
}

FourierBaseline fourier_baseline(const AutocorrResult& ac, int zero_pad_factor)
{
    if (zero_pad_factor < 1)
        throw std::invalid_argument("fourier_baseline: zero_pad_factor must be >= 1");
    const std::size_t l = ac.values.size();
    if (l < 4)
        throw std::invalid_argument("fourier_baseline: too few lags");

    // even extension (the autocorrelation is symmetric) then zero padding;
    // the transform is then real up to rounding
    const std::size_t m =
        next_pow2(2 * (l + 1) * static_cast<std::size_t>(zero_pad_factor));
    std::vector<std::complex<double>> buf(m, {0.0, 0.0});
    for (std::size_t k = 1; k <= l; ++k) {
        buf[k] = {ac.values[k - 1], 0.0};
        buf[m - k] = {ac.values[k - 1], 0.0};
    }
    fft_inplace(buf, false);

    const std::size_t half = m / 2;
    std::vector<double> mag(half);
    for (std::size_t j = 0; j < half; ++j)
        mag[j] = std::abs(buf[j].real());

    std::size_t peak = 1;
    for (std::size_t j = 2; j < half; ++j)
        if (mag[j] > mag[peak])
            peak = j;

    std::vector<double> tmp = mag;
    std::nth_element(tmp.begin(), tmp.begin() + half / 2, tmp.end());
    const double median = tmp[half / 2];
    if (!(mag[peak] > 3.0 * median))
        throw std::runtime_error("fourier_baseline: no spectral peak above 3x median");

    const double df = 1.0 / (static_cast<double>(m) * ac.spacing);

    // parabolic refinement around the peak bin
    double shift = 0.0;
    double peak_mag = mag[peak];
    if (peak + 1 < half && peak >= 1) {
        const double ym = mag[peak - 1], y0 = mag[peak], yp = mag[peak + 1];
        const double denom = ym - 2.0 * y0 + yp;
        if (denom < 0.0) {
            shift = 0.5 * (ym - yp) / denom;
            peak_mag = y0 - 0.25 * (ym - yp) * shift;
        }
    }

    // half-maximum crossings by linear interpolation
    const double level = 0.5 * peak_mag;
    double f_left = 0.0;
    {
        std::size_t j = peak;
        while (j > 0 && mag[j] >= level)
            --j;
        if (mag[j] >= level)
            throw std::runtime_error("fourier_baseline: left half-max crossing not found");
        const double frac = (level - mag[j]) / (mag[j + 1] - mag[j]);
        f_left = (static_cast<double>(j) + frac) * df;
    }
    double f_right = 0.0;
    {
        std::size_t j = peak;
        while (j + 1 < half && mag[j] >= level)
            ++j;
        if (mag[j] >= level)
            throw std::runtime_error("fourier_baseline: right half-max crossing not found");
        const double frac = (mag[j - 1] - level) / (mag[j - 1] - mag[j]);
        f_right = (static_cast<double>(j - 1) + frac) * df;
    }

    FourierBaseline out;
    out.peak_frequency = (static_cast<double>(peak) + shift) * df;
    out.half_fwhm = 0.5 * (f_right - f_left);
    return out;
}

}  // namespace nanonmr
