#include "nanonmr/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "nanonmr/fft.hpp"
#include "nanonmr/rng.hpp"

namespace nanonmr {

namespace {

double envelope_value(EnvelopeKind kind, double z)
{
    return kind == EnvelopeKind::PowerLawDiffusion ? envelope_power_law(z)
                                                   : envelope_exponential(z);
}

void digest_mix(std::uint64_t& h, const char* data, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 0x100000001b3ull;
    }
}

void digest_field(std::uint64_t& h, double v)
{
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.17g;", v);
    digest_mix(h, buf, static_cast<std::size_t>(n));
}

}  // namespace

std::uint64_t config_digest(const TraceConfig& config)
{
    std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a offset basis
    digest_field(h, config.model.phi_rms);
    digest_field(h, config.model.delta);
    digest_field(h, config.model.t_d);
    digest_field(h, config.model.kind == EnvelopeKind::PowerLawDiffusion ? 0.0 : 1.0);
    if (config.model.nuisance) {
        digest_field(h, config.model.nuisance->amplitude);
        digest_field(h, config.model.nuisance->t_exp);
        digest_field(h, config.model.nuisance->offset);
    }
    digest_field(h, config.readout.eta0);
    digest_field(h, config.readout.eta1);
    digest_field(h, config.timing.tau);
    digest_field(h, config.timing.tau_o);
    digest_field(h, config.timing.total_time);
    digest_field(h, static_cast<double>(config.n_measurements));
    digest_field(h, static_cast<double>(config.seed));
    digest_field(h, config.count_model == CountModel::Poisson ? 0.0 : 1.0);
    digest_field(h, config.t2 ? *config.t2 : -1.0);
    return h;
}

void TraceConfig::validate(Warnings* warnings) const
{
    model.validate();
    readout.validate();
    timing.validate();
    if (n_measurements < 2)
        throw std::invalid_argument("TraceConfig: n_measurements must be >= 2");
    if (t2 && !(*t2 > 0.0))
        throw std::invalid_argument("TraceConfig: t2 must be > 0");
    const double implied = static_cast<double>(n_measurements) * timing.tau_tilde();
    if (std::abs(implied - timing.total_time) > 0.01 * timing.total_time)
        warn(warnings, "TraceConfig: n_measurements * tau_tilde differs from total_time by >1%");
}

std::pair<std::vector<double>, std::vector<double>> synthesize_amplitudes(
    std::int64_t n, double dt, const CorrelationModel& model, std::uint64_t seed,
    Warnings* warnings)
{
    if (n < 2)
        throw std::invalid_argument("synthesize_amplitudes: n must be >= 2");
    if (!(dt > 0.0))
        throw std::invalid_argument("synthesize_amplitudes: dt must be > 0");
    model.validate();

    const auto un = static_cast<std::size_t>(n);
    if (model.phi_rms == 0.0)
        return {std::vector<double>(un, 0.0), std::vector<double>(un, 0.0)};

    const double var = model.phi_rms * model.phi_rms;
    const std::size_t m = next_pow2(2 * (un - 1));

    // circulant first row: r(min(k, m-k)) with r(k) = var * C(k dt / t_d)
    std::vector<std::complex<double>> eig(m);
    for (std::size_t k = 0; k <= m / 2; ++k) {
        const double r = var * envelope_value(model.kind,
                                              static_cast<double>(k) * dt / model.t_d);
        eig[k] = {r, 0.0};
        if (k != 0 && k != m / 2)
            eig[m - k] = {r, 0.0};
    }
    fft_inplace(eig, false);

    double max_eig = 0.0;
    double min_eig = 0.0;
    for (const auto& e : eig) {
        max_eig = std::max(max_eig, e.real());
        min_eig = std::min(min_eig, e.real());
    }
    if (min_eig < -1e-6 * max_eig)
        throw std::runtime_error("synthesize_amplitudes: circulant embedding is not "
                                 "nonnegative definite (min eigenvalue "
                                 + std::to_string(min_eig) + ")");
    if (min_eig < 0.0)
        warn(warnings, "synthesize_amplitudes: clipped small negative circulant eigenvalues");

    Rng rng(seed);
    std::vector<std::complex<double>> w(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double lambda = std::max(0.0, eig[k].real());
        const double s = std::sqrt(lambda);
        const double u = rng.normal();
        const double v = rng.normal();
        w[k] = {s * u, s * v};
    }
    fft_inplace(w, true);

    // w_j = (1/m) sum_k sqrt(l_k) eps_k e^{2pi i jk/m}: scaling by sqrt(m)
    // makes Re/Im two independent sequences with covariance r.
    const double scale = std::sqrt(static_cast<double>(m));
    std::vector<double> a(un), b(un);
    for (std::size_t j = 0; j < un; ++j) {
        a[j] = scale * w[j].real();
        b[j] = scale * w[j].imag();
    }
    return {std::move(a), std::move(b)};
}

std::vector<double> phase_sequence(const std::vector<double>& a,
                                   const std::vector<double>& b,
                                   const CorrelationModel& model,
                                   double dt)
{
    if (a.size() != b.size())
        throw std::invalid_argument("phase_sequence: length mismatch");
    std::vector<double> phi(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double t = static_cast<double>(j) * dt;
        phi[j] = a[j] * std::cos(model.delta * t) + b[j] * std::sin(model.delta * t);
    }
    return phi;
}

PhotonTrace simulate_qdyne_trace(const TraceConfig& config, Warnings* warnings)
{
    config.validate(warnings);

    const double tau_tilde = config.timing.tau_tilde();
    const double eta = config.readout.eta();
    double c_eff = config.readout.contrast();
    if (config.t2)
        c_eff *= std::exp(-config.timing.tau / *config.t2);
    if (eta - 0.5 * c_eff < 0.0) {
        if (!config.clamp_negative_mean)
            throw std::invalid_argument("simulate_qdyne_trace: photon mean can go negative; "
                                        "enable clamping or fix the readout");
        warn(warnings, "simulate_qdyne_trace: negative means clamped to zero");
    }

    auto [a, b] = synthesize_amplitudes(config.n_measurements, tau_tilde, config.model,
                                        split_seed(config.seed, 1), warnings);
    const std::vector<double> phi = phase_sequence(a, b, config.model, tau_tilde);

    Rng rng(split_seed(config.seed, 2));
    PhotonTrace trace;
    trace.spacing = tau_tilde;
    trace.meta.seed = config.seed;
    trace.meta.config_digest = config_digest(config);
    trace.counts.resize(phi.size());
    for (std::size_t j = 0; j < phi.size(); ++j) {
        double mean = eta - 0.5 * c_eff * std::sin(phi[j]);
        if (mean < 0.0)
            mean = 0.0;
        trace.counts[j] = (config.count_model == CountModel::Poisson)
                              ? rng.poisson(mean)
                              : rng.bernoulli(std::min(mean, 1.0));
    }
    return trace;
}

CsSweep simulate_cs_sweep(const CorrelationModel& model,
                          const ReadoutParams& readout,
                          double tau,
                          const std::vector<double>& tau_w_values,
                          long n_repeats,
                          std::uint64_t seed)
{
    model.validate();
    readout.validate();
    if (!(tau > 0.0))
        throw std::invalid_argument("simulate_cs_sweep: tau must be > 0");
    if (n_repeats < 1)
        throw std::invalid_argument("simulate_cs_sweep: n_repeats must be >= 1");
    for (std::size_t i = 1; i < tau_w_values.size(); ++i)
        if (!(tau_w_values[i] > tau_w_values[i - 1]))
            throw std::invalid_argument("simulate_cs_sweep: tau_w_values must increase");

    // phase pairs use the signal covariance; the nuisance term models
    // readout drifts, not phase correlations
    CorrelationModel signal = model;
    signal.nuisance.reset();

    const double var = model.phi_rms * model.phi_rms;
    const double eta = readout.eta();
    const double c = readout.contrast();

    CsSweep sweep;
    sweep.tau_w_values = tau_w_values;
    sweep.n_repeats = n_repeats;
    sweep.contrast_means.resize(tau_w_values.size(), 0.0);

    Rng rng(seed);
    for (std::size_t i = 0; i < tau_w_values.size(); ++i) {
        const double t = tau + tau_w_values[i];
        double rho = 0.0;
        if (var > 0.0)
            rho = covariance(signal, t) / var;  // correlation coefficient, |rho| <= 1
        const double ortho = std::sqrt(std::max(0.0, 1.0 - rho * rho));
        double acc = 0.0;
        for (long rep = 0; rep < n_repeats; ++rep) {
            const double z1 = rng.normal();
            const double z2 = rng.normal();
            const double phi1 = model.phi_rms * z1;
            const double phi2 = model.phi_rms * (rho * z1 + ortho * z2);
            const double signal_term = 0.5 * c * std::sin(phi1) * std::sin(phi2);
            const double n_plus = rng.poisson(std::max(0.0, eta + signal_term));
            const double n_minus = rng.poisson(std::max(0.0, eta - signal_term));
            acc += n_plus - n_minus;
        }
        sweep.contrast_means[i] = acc / static_cast<double>(n_repeats);
    }
    return sweep;
}

}  // namespace nanonmr
