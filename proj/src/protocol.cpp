#include "nanonmr/protocol.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace nanonmr {

namespace {
constexpr double kPi = std::numbers::pi_v<double>;

double envelope_value(EnvelopeKind kind, double z)
{
    return kind == EnvelopeKind::PowerLawDiffusion ? envelope_power_law(z)
                                                   : envelope_exponential(z);
}
}  // namespace

void SensorPhysics::validate() const
{
    if (!(gamma_sensor > 0.0) || !(gamma_nuclear > 0.0))
        throw std::invalid_argument("SensorPhysics: gyromagnetic ratios must be > 0");
    if (!(t2 > 0.0))
        throw std::invalid_argument("SensorPhysics: t2 must be > 0");
    if (!std::isnan(depth) && !(depth > 0.0))
        throw std::invalid_argument("SensorPhysics: depth must be > 0");
    if (!std::isnan(spin_density) && !(spin_density > 0.0))
        throw std::invalid_argument("SensorPhysics: spin_density must be > 0");
    if (!std::isnan(b_rms) && !(b_rms > 0.0))
        throw std::invalid_argument("SensorPhysics: b_rms must be > 0");
    if (!std::isnan(depth) && !std::isnan(spin_density) && !std::isnan(b_rms)) {
        const double implied = brms_from_depth(depth, spin_density, *this);
        if (std::abs(implied - b_rms) > 0.01 * b_rms)
            throw std::invalid_argument(
                "SensorPhysics: b_rms and depth disagree by more than 1%");
    }
}

void ReadoutTrace::validate(Warnings* warnings) const
{
    if (time_axis.empty())
        throw std::invalid_argument("ReadoutTrace: empty trace");
    if (time_axis.size() != counts0.size() || time_axis.size() != counts1.size())
        throw std::invalid_argument("ReadoutTrace: column length mismatch");
    for (std::size_t i = 1; i < time_axis.size(); ++i)
        if (!(time_axis[i] > time_axis[i - 1]))
            throw std::invalid_argument("ReadoutTrace: time_axis must strictly increase");
    bool nondecreasing = true;
    bool contrast_ok = true;
    for (std::size_t i = 1; i < counts0.size(); ++i) {
        if (counts0[i] < counts0[i - 1] || counts1[i] < counts1[i - 1])
            nondecreasing = false;
        if (counts0[i] < counts1[i])
            contrast_ok = false;
    }
    // real traces are noisy; report rather than reject
    if (!nondecreasing)
        warn(warnings, "ReadoutTrace: cumulative counts are not nondecreasing");
    if (!contrast_ok)
        warn(warnings, "ReadoutTrace: counts1 exceeds counts0 at some window ends");
}

double undersample_min_step(double f_larmor, double f_target)
{
    if (!(f_larmor > 0.0) || !(f_target >= 0.0))
        throw std::domain_error("undersample_min_step: bad frequencies");
    if (!(f_target < f_larmor))
        throw std::domain_error("undersample_min_step: f_target must be below f_larmor");
    return 1.0 / (f_larmor - f_target);
}

UndersampleStep undersample_step(double f_larmor, double f_target, int n_samples)
{
    if (n_samples < 2)
        throw std::invalid_argument("undersample_step: n_samples must be >= 2");
    if (!(f_target > 0.0))
        throw std::domain_error("undersample_step: f_target must be > 0");
    const double t_min = undersample_min_step(f_larmor, f_target);
    const double t_delta = 1.0 / f_target;
    // round half away from zero, clamp to k >= 1
    long k = std::lround(t_delta / (t_min * (n_samples - 1)));
    if (k < 1)
        k = 1;
    return {static_cast<double>(k) * t_min, k};
}

double snr_shot_noise(const ReadoutParams& readout, long n_measurements)
{
    readout.validate();
    if (n_measurements < 1)
        throw std::invalid_argument("snr_shot_noise: need n_measurements >= 1");
    const double n = static_cast<double>(n_measurements);
    return std::sqrt(n) * (readout.eta0 - readout.eta1)
           / std::sqrt(readout.eta0 + readout.eta1);
}

double snr_shot_noise_chi(const ReadoutParams& readout, long n_measurements)
{
    readout.validate();
    if (n_measurements < 1)
        throw std::invalid_argument("snr_shot_noise_chi: need n_measurements >= 1");
    const double n = static_cast<double>(n_measurements);
    const double chi = readout.chi();
    return std::sqrt(n) * chi * std::sqrt(readout.eta0) / std::sqrt(2.0 - chi);
}

double phi_rms_from(double tau, const SensorPhysics& physics)
{
    if (!(tau > 0.0))
        throw std::domain_error("phi_rms_from: tau must be > 0");
    if (std::isnan(physics.b_rms))
        throw std::invalid_argument("phi_rms_from: physics.b_rms not set");
    return 2.0 / kPi * physics.gamma_sensor * physics.b_rms * tau;
}

double brms_from_depth(double depth, double spin_density, const SensorPhysics& physics)
{
    if (!(depth > 0.0) || !(spin_density > 0.0))
        throw std::domain_error("brms_from_depth: requires positive inputs");
    const double dipole = constants::mu0 * constants::hbar * physics.gamma_nuclear / (4.0 * kPi);
    const double geom = 5.0 * kPi / (96.0 * depth * depth * depth);
    return std::sqrt(spin_density * dipole * dipole * geom);
}

double depth_from_brms(double b_rms, double spin_density, const SensorPhysics& physics)
{
    if (!(b_rms > 0.0) || !(spin_density > 0.0))
        throw std::domain_error("depth_from_brms: requires positive inputs");
    const double dipole = constants::mu0 * constants::hbar * physics.gamma_nuclear / (4.0 * kPi);
    const double d3 = spin_density * dipole * dipole * 5.0 * kPi / (96.0 * b_rms * b_rms);
    return std::cbrt(d3);
}

double qdyne_signal(double tau,
                    const SensorPhysics& physics,
                    const ReadoutParams& readout,
                    EnvelopeKind envelope,
                    double t_d)
{
    if (!(tau > 0.0))
        throw std::domain_error("qdyne_signal: tau must be > 0");
    readout.validate();
    const double phi = phi_rms_from(tau, physics);
    const double decoherence = std::isinf(physics.t2) ? 1.0 : std::exp(-2.0 * tau / physics.t2);
    const double env = std::isinf(t_d) ? 1.0 : envelope_value(envelope, tau / t_d);
    return readout.contrast() / 8.0 * decoherence * env * (1.0 - std::exp(-2.0 * phi * phi));
}

double qdyne_snr_rate(double tau,
                      double tau_o,
                      const SensorPhysics& physics,
                      const ReadoutParams& readout,
                      EnvelopeKind envelope,
                      double t_d)
{
    if (!(tau_o >= 0.0))
        throw std::domain_error("qdyne_snr_rate: tau_o must be >= 0");
    return qdyne_signal(tau, physics, readout, envelope, t_d) / std::sqrt(tau_o + tau);
}

TauOptimum maximize_scalar(const std::function<double(double)>& f,
                           double lo,
                           double hi,
                           double rel_tol,
                           int scan_points)
{
    if (!(0.0 < lo && lo < hi))
        throw std::invalid_argument("maximize_scalar: requires 0 < lo < hi");
    if (scan_points < 3)
        throw std::invalid_argument("maximize_scalar: need at least 3 scan points");

    // log-spaced bracketing scan with exact endpoints
    std::vector<double> xs(scan_points);
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < scan_points; ++i)
        xs[i] = std::exp(llo + (lhi - llo) * i / (scan_points - 1.0));
    xs.front() = lo;
    xs.back() = hi;
    int best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < scan_points; ++i) {
        const double v = f(xs[i]);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    if (best == 0 || best == scan_points - 1) {
        return {xs[best], best_val, true};
    }

    // golden-section refinement inside the bracketing triple
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = xs[best - 1], b = xs[best + 1];
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while ((b - a) > rel_tol * std::max(std::abs(a), std::abs(b))) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    const double x_star = 0.5 * (a + b);
    return {x_star, f(x_star), false};
}

TauOptimum optimize_tau(TauObjective objective,
                        const SensorPhysics& physics,
                        const ReadoutParams& readout,
                        EnvelopeKind envelope,
                        double t_d,
                        double tau_lo,
                        double tau_hi,
                        double tau_o)
{
    physics.validate();
    const auto f = [&](double tau) {
        return objective == TauObjective::signal
                   ? qdyne_signal(tau, physics, readout, envelope, t_d)
                   : qdyne_snr_rate(tau, tau_o, physics, readout, envelope, t_d);
    };
    return maximize_scalar(f, tau_lo, tau_hi);
}

ReadoutWindowResult readout_window_optimize(const ReadoutTrace& trace, Warnings* warnings)
{
    trace.validate(warnings);
    bool any_signal = false;
    for (std::size_t i = 0; i < trace.counts0.size(); ++i)
        if (trace.counts0[i] != 0.0 || trace.counts1[i] != 0.0)
            any_signal = true;
    if (!any_signal)
        throw std::invalid_argument("readout_window_optimize: all-zero trace");

    ReadoutWindowResult out;
    const std::size_t n = trace.time_axis.size();
    out.merit_snr.resize(n);
    out.merit_fisher.resize(n);
    double best_snr = -std::numeric_limits<double>::infinity();
    double best_fisher = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double eta0 = trace.counts0[i];
        const double eta1 = trace.counts1[i];
        const double c = eta0 - eta1;
        const double eta = 0.5 * (eta0 + eta1);
        out.merit_snr[i] = (eta > 0.0) ? c / std::sqrt(2.0 * eta) : 0.0;
        out.merit_fisher[i] = (4.0 * eta + c * c > 0.0) ? c * c / (4.0 * eta + c * c) : 0.0;
        if (out.merit_snr[i] > best_snr) {
            best_snr = out.merit_snr[i];
            out.index_snr = i;
        }
        if (out.merit_fisher[i] > best_fisher) {
            best_fisher = out.merit_fisher[i];
            out.index_fisher = i;
        }
    }
    out.t_snr = trace.time_axis[out.index_snr];
    out.t_fisher = trace.time_axis[out.index_fisher];
    out.degenerate = !(best_snr > 0.0) || !(best_fisher > 0.0);
    if (out.degenerate)
        warn(warnings, "readout_window_optimize: zero contrast, maximizer degenerate");
    return out;
}

double sample_rate_compensation(double f_larmor, double delta_f_larmor, double f_sample)
{
    if (!(f_larmor > 0.0))
        throw std::domain_error("sample_rate_compensation: f_larmor must be > 0");
    return f_sample * delta_f_larmor / f_larmor;
}

}  // namespace nanonmr
