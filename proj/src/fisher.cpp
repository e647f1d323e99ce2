#include "nanonmr/fisher.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "nanonmr/special_functions.hpp"

namespace nanonmr {

namespace {

constexpr double kPi = std::numbers::pi_v<double>;
constexpr double kTwoOverSqrtPi = 2.0 / 1.7724538509055160273;
constexpr double kShapeRelTol = 1e-9;

// tail handling thresholds for the power-law kernels: beyond z_t the
// squared envelope is replaced by its (rapidly convergent) expansion in
// z^{-1/2} and integrated semi-analytically. z_t is chosen so both the
// expansion (z >= 16) and the oscillatory treatment (2 a z_t >= 100) hold.
constexpr double kTailSeriesMin = 16.0;
constexpr double kTailOscSafety = 50.0;

double squared_envelope(InformationEnvelope env, double z)
{
    switch (env) {
    case InformationEnvelope::PowerLaw: {
        const double c = envelope_power_law(z);
        return c * c;
    }
    case InformationEnvelope::Exponential:
        return std::exp(-2.0 * z);
    case InformationEnvelope::TailPower: {
        if (z <= 0.0)
            return 0.0;  // kernel carries z^2, so z^2 C^2 -> (4/sqrt(pi))/z
        const double c = detail::envelope_tail_power(z);
        return c * c;
    }
    }
    throw std::logic_error("squared_envelope: bad envelope");
}

// ---- oscillatory tail monomials -----------------------------------------
//
// OscCos(p) = int_{lo}^{hi} z^{-p} cos(w z) dz and the sine partner,
// evaluated by repeated integration by parts. Each level gains a factor
// ~ p/(w z); callers arrange w*lo >= 100 so the recursion converges fast.
// Returned .second is a rigorous bound on the truncated remainder.

struct OscResult {
    double value;
    double bound;
};

OscResult osc_cos(double p, double w, double lo, double hi, int depth);

OscResult osc_sin(double q, double w, double lo, double hi, int depth)
{
    const double boundary =
        (-std::pow(hi, -q) * std::cos(w * hi) + std::pow(lo, -q) * std::cos(w * lo)) / w;
    const double residual_scale = std::pow(lo, -q) / w;  // bound via |cos| <= 1
    if (depth <= 0 || q / (w * lo) > 0.5)
        return {boundary, residual_scale};
    const OscResult inner = osc_cos(q + 1.0, w, lo, hi, depth - 1);
    return {boundary - (q / w) * inner.value, (q / w) * inner.bound};
}

OscResult osc_cos(double p, double w, double lo, double hi, int depth)
{
    if (p == 0.0)
        return {(std::sin(w * hi) - std::sin(w * lo)) / w, 0.0};
    const double boundary =
        (std::pow(hi, -p) * std::sin(w * hi) - std::pow(lo, -p) * std::sin(w * lo)) / w;
    const double residual_scale = std::pow(lo, -p) / w;
    if (depth <= 0 || p / (w * lo) > 0.5)
        return {boundary, residual_scale};
    const OscResult inner = osc_sin(p + 1.0, w, lo, hi, depth - 1);
    return {boundary + (p / w) * inner.value, (p / w) * inner.bound};
}

// int_{lo}^{hi} z^{-p} dz
double power_integral(double p, double lo, double hi)
{
    if (p == 1.0)
        return std::log(hi / lo);
    return (std::pow(hi, 1.0 - p) - std::pow(lo, 1.0 - p)) / (1.0 - p);
}

// Semi-analytic int_{z_t}^{X} (X - z) z^{-1} [C^2 z^3] sin^2(a z) dz using
// the tail expansion C^2 z^3 = sum_k g_k z^{-k/2}. A single-entry table is
// an exact tail (no truncation term).
QuadratureResult qdyne_tail_part(double a, double X, double z_t, std::span<const double> g)
{
    const double w = 2.0 * a;
    double value = 0.0;
    double err = 0.0;
    double last_mean_mag = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g[k] == 0.0)
            continue;
        const double p_hi = 1.0 + 0.5 * static_cast<double>(k);  // with the X factor
        const double p_lo = 0.5 * static_cast<double>(k);        // without
        // sin^2 = 1/2 - cos(w z)/2
        const double mean = 0.5 * (X * power_integral(p_hi, z_t, X) - power_integral(p_lo, z_t, X));
        const OscResult oc_hi = osc_cos(p_hi, w, z_t, X, 14);
        const OscResult oc_lo = osc_cos(p_lo, w, z_t, X, 14);
        const double osc = -0.5 * (X * oc_hi.value - oc_lo.value);
        value += g[k] * (mean + osc);
        err += std::abs(g[k]) * 0.5 * (X * oc_hi.bound + oc_lo.bound);
        last_mean_mag = std::abs(g[k] * mean);
    }
    // expansion truncation: coefficients decay factorially beyond the table
    if (g.size() > 1)
        err += last_mean_mag * std::pow(z_t, -0.5);
    return {value, err, true, 0};
}

// shape integral int_0^1 t^2 sin^2(a t) C^2(t) dt
QuadratureResult cs_shape_integral(double a, InformationEnvelope env)
{
    const auto f = [a, env](double t) {
        const double s = std::sin(a * t);
        return t * t * s * s * squared_envelope(env, t);
    };
    const double osc_width = (a > 2.0 * kPi) ? kPi / a : std::numeric_limits<double>::infinity();
    auto pts = oscillation_breakpoints(0.0, 1.0, osc_width, env == InformationEnvelope::TailPower);
    return integrate_adaptive(f, pts, 0.0, kShapeRelTol, 200000);
}

// shape integral int_0^X (X - z) z^2 sin^2(a z) C^2(z) dz
QuadratureResult qdyne_shape_integral(double a, double X, InformationEnvelope env)
{
    const auto f = [a, X, env](double z) {
        const double s = std::sin(a * z);
        return (X - z) * z * z * s * s * squared_envelope(env, z);
    };

    if (env == InformationEnvelope::Exponential) {
        const double z_hi = std::min(X, 45.0);
        const double osc_width =
            (a * z_hi > 2.0 * kPi) ? kPi / a : std::numeric_limits<double>::infinity();
        auto pts = oscillation_breakpoints(0.0, z_hi, osc_width, false);
        QuadratureResult r = integrate_adaptive(f, pts, 0.0, kShapeRelTol, 200000);
        if (z_hi < X)  // truncation remainder, decays as exp(-2 z_hi)
            r.abs_error += X * std::exp(-2.0 * z_hi)
                           * (0.5 * z_hi * z_hi + 0.5 * z_hi + 0.25);
        return r;
    }

    const double z_t = std::min(X, std::max(kTailSeriesMin, kTailOscSafety / a));
    const double osc_width =
        (a * z_t > 2.0 * kPi) ? kPi / a : std::numeric_limits<double>::infinity();
    auto pts = oscillation_breakpoints(0.0, z_t, osc_width,
                                       env == InformationEnvelope::TailPower);
    QuadratureResult direct = integrate_adaptive(f, pts, 0.0, kShapeRelTol, 200000);
    if (z_t >= X)
        return direct;

    static const std::vector<double> tail_only_g = {4.0 / 1.7724538509055160273};
    const std::span<const double> g = (env == InformationEnvelope::PowerLaw)
                                          ? detail::tail_squared_coefficients()
                                          : std::span<const double>(tail_only_g);
    const QuadratureResult tail = qdyne_tail_part(a, X, z_t, g);
    return {direct.value + tail.value, direct.abs_error + tail.abs_error,
            direct.converged, direct.n_evaluations};
}

double cs_prefactor(const CorrelationModel& m, const ReadoutParams& r, const ProtocolTiming& t)
{
    const double phi2 = m.phi_rms * m.phi_rms;
    return r.fisher_factor() * phi2 * phi2 * t.total_time * m.t_d;
}

double qdyne_prefactor(const CorrelationModel& m, const ReadoutParams& r, const ProtocolTiming& t)
{
    const double phi2 = m.phi_rms * m.phi_rms;
    const double ff = r.fisher_factor();
    const double td2 = m.t_d * m.t_d;
    const double tt = t.tau_tilde();
    return ff * ff * phi2 * phi2 * td2 * td2 / (tt * tt);
}

}  // namespace

void ReadoutParams::validate() const
{
    if (!(eta1 >= 0.0) || !(eta0 > eta1))
        throw std::invalid_argument("ReadoutParams: requires eta0 > eta1 >= 0");
}

void ProtocolTiming::validate() const
{
    if (!(tau > 0.0))
        throw std::invalid_argument("ProtocolTiming: tau must be > 0");
    if (!(tau_o >= 0.0))
        throw std::invalid_argument("ProtocolTiming: tau_o must be >= 0");
    if (!(total_time > 0.0))
        throw std::invalid_argument("ProtocolTiming: total_time must be > 0");
}

InformationEnvelope information_envelope(EnvelopeKind kind)
{
    return kind == EnvelopeKind::PowerLawDiffusion ? InformationEnvelope::PowerLaw
                                                   : InformationEnvelope::Exponential;
}

double fisher_single_cs(const CorrelationModel& model, const ReadoutParams& readout, double t)
{
    if (!(t >= 0.0))
        throw std::domain_error("fisher_single_cs: requires t >= 0");
    model.validate();
    readout.validate();
    const double phi2 = model.phi_rms * model.phi_rms;
    const double s = std::sin(model.delta * t);
    const double env = squared_envelope(information_envelope(model.kind), t / model.t_d);
    return readout.fisher_factor() * phi2 * phi2 * t * t * s * s * env;
}

double fisher_single_qdyne(const CorrelationModel& model, const ReadoutParams& readout, double t)
{
    return readout.fisher_factor() * fisher_single_cs(model, readout, t);
}

FisherResult fisher_total_cs_numeric_env(const CorrelationModel& model,
                                         const ReadoutParams& readout,
                                         const ProtocolTiming& timing,
                                         InformationEnvelope env,
                                         Warnings* warnings)
{
    model.validate();
    readout.validate();
    timing.validate();
    if (timing.total_time < 10.0 * model.t_d)
        warn(warnings, "fisher_total_cs_numeric: total_time is not >> t_d; "
                       "the continuum form is inaccurate");
    if (model.delta == 0.0)
        return {0.0, FisherMethod::quadrature, 0.0, true};
    const double a = model.delta * model.t_d;
    const QuadratureResult q = cs_shape_integral(a, env);
    const double pref = cs_prefactor(model, readout, timing);
    return {pref * q.value, FisherMethod::quadrature, pref * q.abs_error, q.converged};
}

FisherResult fisher_total_cs_numeric(const CorrelationModel& model,
                                     const ReadoutParams& readout,
                                     const ProtocolTiming& timing,
                                     Warnings* warnings)
{
    return fisher_total_cs_numeric_env(model, readout, timing,
                                       information_envelope(model.kind), warnings);
}

FisherResult fisher_total_qdyne_numeric_env(const CorrelationModel& model,
                                            const ReadoutParams& readout,
                                            const ProtocolTiming& timing,
                                            InformationEnvelope env,
                                            Warnings* warnings)
{
    model.validate();
    readout.validate();
    timing.validate();
    if (!(timing.tau_tilde() < model.t_d))
        warn(warnings, "fisher_total_qdyne_numeric: tau_tilde >= t_d; "
                       "the continuum approximation degrades");
    if (model.delta == 0.0)
        return {0.0, FisherMethod::quadrature, 0.0, true};
    const double a = model.delta * model.t_d;
    const double X = timing.total_time / model.t_d;
    const QuadratureResult q = qdyne_shape_integral(a, X, env);
    const double pref = qdyne_prefactor(model, readout, timing);
    return {pref * q.value, FisherMethod::quadrature, pref * q.abs_error, q.converged};
}

FisherResult fisher_total_qdyne_numeric(const CorrelationModel& model,
                                        const ReadoutParams& readout,
                                        const ProtocolTiming& timing,
                                        Warnings* warnings)
{
    return fisher_total_qdyne_numeric_env(model, readout, timing,
                                          information_envelope(model.kind), warnings);
}

FisherResult fisher_total_cs_sum(const CorrelationModel& model,
                                 const ReadoutParams& readout,
                                 const ProtocolTiming& timing)
{
    model.validate();
    readout.validate();
    timing.validate();
    if (timing.total_time / model.t_d > 1e7 + 0.5)
        throw std::invalid_argument("fisher_total_cs_sum: T/t_d exceeds the 1e7 cost guard");
    const long long n = std::llround(std::floor(timing.total_time / model.t_d));
    if (n < 1)
        return {0.0, FisherMethod::riemann_sum, 0.0, true};
    const InformationEnvelope env = information_envelope(model.kind);
    const double a = model.delta * model.t_d;
    // one term per measurement; measurement j probes normalized separation j/n
    const double dn = static_cast<double>(n);
    double sum = 0.0;
    double f_first = 0.0, f_last = 0.0;
    for (long long j = 0; j < n; ++j) {
        const double t = static_cast<double>(j) / dn;
        const double s = std::sin(a * t);
        const double f = t * t * s * s * squared_envelope(env, t);
        sum += f;
        if (j == 0)
            f_first = f;
        f_last = f;
    }
    const double pref = cs_prefactor(model, readout, timing);
    const double value = pref * sum / dn;
    // leading Euler-Maclaurin boundary term as the discretization estimate
    const double err = pref * std::abs(f_last - f_first) / (2.0 * dn);
    return {value, FisherMethod::riemann_sum, err, true};
}

FisherResult fisher_total_qdyne_sum(const CorrelationModel& model,
                                    const ReadoutParams& readout,
                                    const ProtocolTiming& timing)
{
    model.validate();
    readout.validate();
    timing.validate();
    const double tt = timing.tau_tilde();
    if (timing.total_time / tt > 2e7 + 0.5)
        throw std::invalid_argument("fisher_total_qdyne_sum: T/tau_tilde exceeds the cost guard");
    const long long n = std::llround(std::floor(timing.total_time / tt));
    const InformationEnvelope env = information_envelope(model.kind);
    const double phi2 = model.phi_rms * model.phi_rms;
    const double ff = readout.fisher_factor();
    const double pref = ff * ff * phi2 * phi2;
    double sum = 0.0;
    for (long long j = 1; j <= n; ++j) {
        const double t = static_cast<double>(j) * tt;
        const double s = std::sin(model.delta * t);
        const double weight = static_cast<double>(n - j);
        if (weight == 0.0)
            continue;
        sum += weight * t * t * s * s * squared_envelope(env, t / model.t_d);
    }
    const double value = pref * sum;
    const double err = (n > 0) ? std::abs(value) / static_cast<double>(n) : 0.0;
    return {value, FisherMethod::riemann_sum, err, true};
}

FisherResult fisher_total_cs_closed_powerlaw(const CorrelationModel& model,
                                             const ReadoutParams& readout,
                                             const ProtocolTiming& timing,
                                             bool small_delta)
{
    model.validate();
    readout.validate();
    timing.validate();
    const double pref = cs_prefactor(model, readout, timing);
    if (small_delta) {
        const double dtd = model.delta * model.t_d;
        return {kTwoOverSqrtPi * pref * dtd * dtd, FisherMethod::closed_form, 0.0, true};
    }
    if (!(model.delta > 0.0))
        throw std::domain_error("fisher_total_cs_closed_powerlaw: full form needs delta > 0");
    const double x = 2.0 * model.delta * model.t_d;
    const double bracket =
        std::numbers::egamma_v<double> - cosine_integral(x) + std::log(x);
    return {kTwoOverSqrtPi * pref * bracket, FisherMethod::closed_form, 0.0, true};
}

FisherResult fisher_total_qdyne_closed_powerlaw(const CorrelationModel& model,
                                                const ReadoutParams& readout,
                                                const ProtocolTiming& timing,
                                                Warnings* warnings)
{
    model.validate();
    readout.validate();
    timing.validate();
    const double dT = model.delta * timing.total_time;
    if (!(dT > 1.0))
        throw std::domain_error("fisher_total_qdyne_closed_powerlaw: requires delta*T > 1");
    if (!(model.delta * model.t_d < 1.0))
        warn(warnings, "fisher_total_qdyne_closed_powerlaw: delta*t_d >= 1, outside the "
                       "regime of the approximation");
    const double phi2 = model.phi_rms * model.phi_rms;
    const double ff = readout.fisher_factor();
    const double tt = timing.tau_tilde();
    const double value = kTwoOverSqrtPi * ff * ff * phi2 * phi2 * model.t_d * model.t_d
                         * model.t_d * timing.total_time * std::log(dT) / (tt * tt);
    return {value, FisherMethod::closed_form, 0.0, true};
}

FisherResult fisher_total_cs_closed_exponential(const CorrelationModel& model,
                                                const ReadoutParams& readout,
                                                const ProtocolTiming& timing,
                                                bool small_delta)
{
    model.validate();
    readout.validate();
    timing.validate();
    const double pref = cs_prefactor(model, readout, timing);
    const double a = model.delta * model.t_d;
    const double e2 = std::exp(2.0);
    if (small_delta) {
        // lim_{a->0} J(a)/a^2 = int_0^1 t^4 e^{-2t} dt = 3(e^2-7)/(4e^2)
        return {0.75 * (e2 - 7.0) / e2 * pref * a * a, FisherMethod::closed_form, 0.0, true};
    }
    // J(a) = int_0^1 t^2 sin^2(a t) e^{-2t} dt, exactly:
    const double a2 = a * a;
    const double one = 1.0 + a2;
    const double bracket = (e2 - 5.0) * (a2 * a2 * a2 + 3.0 * a2 * a2)
                           + 3.0 * (2.0 * e2 - 5.0) * a2
                           + (a2 + 5.0) * std::cos(2.0 * a)
                           - a * (2.0 * a2 * a2 + 7.0 * a2 + 9.0) * std::sin(2.0 * a) - 5.0;
    const double value = pref * bracket / (8.0 * e2 * one * one * one);
    return {value, FisherMethod::closed_form, 0.0, true};
}

namespace {

std::complex<double> moment2(std::complex<double> s, double X)
{
    // int_0^X z^2 e^{-s z} dz; Re(s) = 2 so the boundary factor decays
    const std::complex<double> s3 = s * s * s;
    return 2.0 / s3 - std::exp(-s * X) * (X * X / s + 2.0 * X / (s * s) + 2.0 / s3);
}

std::complex<double> moment3(std::complex<double> s, double X)
{
    const std::complex<double> s2 = s * s;
    const std::complex<double> s4 = s2 * s2;
    return 6.0 / s4
           - std::exp(-s * X)
                 * (X * X * X / s + 3.0 * X * X / s2 + 6.0 * X / (s2 * s) + 6.0 / s4);
}

}  // namespace

FisherResult fisher_total_qdyne_closed_exponential(const CorrelationModel& model,
                                                   const ReadoutParams& readout,
                                                   const ProtocolTiming& timing,
                                                   bool small_delta)
{
    model.validate();
    readout.validate();
    timing.validate();
    const double pref = qdyne_prefactor(model, readout, timing);
    const double a = model.delta * model.t_d;
    const double X = timing.total_time / model.t_d;
    if (small_delta) {
        // (3/4) a^2 X in shape units, i.e. (3/4) Phi^4 ff^2 T_D^5 delta^2 T / tau~^2
        return {0.75 * pref * a * a * X, FisherMethod::closed_form, 0.0, true};
    }
    // G = int_0^X (X - z) z^2 sin^2(a z) e^{-2z} dz
    //   = 1/2 [X M2(2) - M3(2)] - 1/2 Re[X M2(2 - 2ia) - M3(2 - 2ia)],
    // with M_n the truncated moments above. Every exponential here decays,
    // so no overflow for any X.
    const std::complex<double> s(2.0, -2.0 * a);
    const double plain = (X * moment2({2.0, 0.0}, X) - moment3({2.0, 0.0}, X)).real();
    const double osc = (X * moment2(s, X) - moment3(s, X)).real();
    const double shape = 0.5 * (plain - osc);
    return {pref * shape, FisherMethod::closed_form, 0.0, true};
}

RatioResult ratio_r_delta(const CorrelationModel& model,
                          const ReadoutParams& readout_cs,
                          const ReadoutParams& readout_qd,
                          const ProtocolTiming& timing_cs,
                          const ProtocolTiming& timing_qd,
                          RatioMethod method,
                          Warnings* warnings)
{
    RatioResult out;
    switch (method) {
    case RatioMethod::quadrature:
        out.info_cs = fisher_total_cs_numeric(model, readout_cs, timing_cs, warnings);
        out.info_qdyne = fisher_total_qdyne_numeric(model, readout_qd, timing_qd, warnings);
        break;
    case RatioMethod::riemann_sum:
        out.info_cs = fisher_total_cs_sum(model, readout_cs, timing_cs);
        out.info_qdyne = fisher_total_qdyne_sum(model, readout_qd, timing_qd);
        break;
    case RatioMethod::closed_form:
        if (model.kind == EnvelopeKind::Exponential) {
            out.info_cs = fisher_total_cs_closed_exponential(model, readout_cs, timing_cs);
            out.info_qdyne =
                fisher_total_qdyne_closed_exponential(model, readout_qd, timing_qd);
        } else {
            out.info_cs = fisher_total_cs_closed_powerlaw(model, readout_cs, timing_cs);
            out.info_qdyne =
                fisher_total_qdyne_closed_powerlaw(model, readout_qd, timing_qd, warnings);
        }
        break;
    case RatioMethod::approximate: {
        // R ~ [c^2/(4 eta + c^2)] ln(delta T) / (delta tau~)^2, Qdyne readout/timing
        const double dT = model.delta * timing_qd.total_time;
        if (!(dT > 1.0))
            throw std::domain_error("ratio_r_delta: approximate form requires delta*T > 1");
        const double dtt = model.delta * timing_qd.tau_tilde();
        out.value = readout_qd.fisher_factor() * std::log(dT) / (dtt * dtt);
        return out;
    }
    }
    if (out.info_cs.value < std::numeric_limits<double>::min()) {
        out.cs_underflow = true;
        out.value = std::numeric_limits<double>::infinity();
    } else {
        out.value = out.info_qdyne.value / out.info_cs.value;
    }
    return out;
}

bool rayleigh_resolvable(double info, double delta)
{
    if (!(info >= 0.0))
        throw std::domain_error("rayleigh_resolvable: info must be >= 0");
    if (!(delta > 0.0))
        throw std::domain_error("rayleigh_resolvable: delta must be > 0");
    return info > 4.0 / (delta * delta);
}

namespace {

struct CellParams {
    CorrelationModel model;
    ReadoutParams readout_cs;
    ReadoutParams readout_qd;
    ProtocolTiming timing_cs;
    ProtocolTiming timing_qd;
};

void apply_axis(CellParams& p, SweepAxis axis, double v)
{
    switch (axis) {
    case SweepAxis::Delta:
        p.model.delta = v;
        break;
    case SweepAxis::TDiffusion:
        p.model.t_d = v;
        break;
    case SweepAxis::TauTilde: {
        const double tau = v - p.timing_qd.tau_o;
        if (!(tau > 0.0))
            throw std::invalid_argument("grid_map: tau_tilde <= tau_o");
        p.timing_qd.tau = tau;
        break;
    }
    case SweepAxis::Chi: {
        if (!(v > 0.0 && v <= 1.0))
            throw std::invalid_argument("grid_map: chi out of (0, 1]");
        p.readout_cs.eta1 = p.readout_cs.eta0 * (1.0 - v);
        p.readout_qd.eta1 = p.readout_qd.eta0 * (1.0 - v);
        break;
    }
    case SweepAxis::TotalTime:
        p.timing_cs.total_time = v;
        p.timing_qd.total_time = v;
        break;
    }
}

GridCell evaluate_cell(const GridSpec& spec, double x, double y)
{
    GridCell cell;
    cell.x = x;
    cell.y = y;
    try {
        CellParams p{spec.model, spec.readout_cs, spec.readout_qd, spec.timing_cs,
                     spec.timing_qd};
        apply_axis(p, spec.x_axis, x);
        apply_axis(p, spec.y_axis, y);
        if (spec.delta_td_product)
            p.model.delta = 2.0 * kPi * (*spec.delta_td_product) / p.model.t_d;
        const RatioResult r = ratio_r_delta(p.model, p.readout_cs, p.readout_qd,
                                            p.timing_cs, p.timing_qd,
                                            RatioMethod::quadrature);
        cell.r_delta = r.value;
        cell.cs_underflow = r.cs_underflow;
        cell.i_cs = r.info_cs.value;
        cell.i_qd = r.info_qdyne.value;
        cell.err_cs = r.info_cs.abs_error_estimate;
        cell.err_qd = r.info_qdyne.abs_error_estimate;
        cell.resolvable_cs =
            (p.model.delta > 0.0) && rayleigh_resolvable(cell.i_cs, p.model.delta);
        cell.resolvable_qd =
            (p.model.delta > 0.0) && rayleigh_resolvable(cell.i_qd, p.model.delta);
        if (!std::isfinite(cell.i_cs) || !std::isfinite(cell.i_qd))
            throw std::runtime_error("non-finite information value");
        cell.ok = true;
    } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
        cell.r_delta = cell.i_cs = cell.i_qd = std::numeric_limits<double>::quiet_NaN();
    }
    return cell;
}

}  // namespace

GridMap grid_map(const GridSpec& spec)
{
    if (spec.x_values.size() < 1 || spec.y_values.size() < 1)
        throw std::invalid_argument("grid_map: axes need at least one value");
    if (!std::is_sorted(spec.x_values.begin(), spec.x_values.end())
        || !std::is_sorted(spec.y_values.begin(), spec.y_values.end()))
        throw std::invalid_argument("grid_map: axis values must be sorted");

    GridMap map;
    map.spec = spec;
    const std::size_t nx = spec.x_values.size();
    const std::size_t ny = spec.y_values.size();
    map.cells.resize(nx * ny);

    const unsigned n_threads =
        std::max(1u, std::min(std::thread::hardware_concurrency(), 16u));
    std::vector<std::thread> workers;
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= nx * ny)
                return;
            const std::size_t iy = i / nx;
            const std::size_t ix = i % nx;
            map.cells[i] = evaluate_cell(spec, spec.x_values[ix], spec.y_values[iy]);
        }
    };
    if (n_threads == 1 || nx * ny < 4) {
        worker();
    } else {
        workers.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t)
            workers.emplace_back(worker);
        for (auto& w : workers)
            w.join();
    }
    return map;
}

}  // namespace nanonmr
