#pragma once

#include <optional>
#include <span>

namespace nanonmr {

// Correlation-decay envelope families. PowerLawDiffusion is the exact
// diffusion envelope C(z) with C(0) = 1 and C ~ z^{-3/2} at long times;
// Exponential is C(z) = exp(-z).
enum class EnvelopeKind {
    PowerLawDiffusion,
    Exponential,
};

// Additive slow-decay term seen in measured auto-correlations
// (fluorescing contaminants, charge-state drift): A exp(-t/t_exp) + offset.
struct NuisanceDecay {
    double amplitude = 0.0;  // dimensionless
    double t_exp = 1.0;      // seconds, > 0
    double offset = 0.0;     // dimensionless

    void validate() const;
};

// Phase covariance model shared by every module:
//   cov(t) = phi_rms^2 cos(delta t) C(t / t_d)  [+ nuisance]
struct CorrelationModel {
    double phi_rms = 1.0;  // rad, rms phase per acquisition
    double delta = 0.0;    // rad/s, frequency offset
    double t_d = 1.0;      // seconds, correlation (diffusion) time
    EnvelopeKind kind = EnvelopeKind::PowerLawDiffusion;
    std::optional<NuisanceDecay> nuisance;

    void validate() const;
};

// Exact diffusion envelope, z = t/T_D >= 0. Evaluated by a small-z
// expansion, the direct closed form with erfcx in the mid range, and a
// large-z expansion, stitched so no branch loses more than a few digits.
double envelope_power_law(double z);

// C(z) = exp(-z), z >= 0.
double envelope_exponential(double z);

// cov(t) for t >= 0 per the model above.
double covariance(const CorrelationModel& model, double t);

namespace detail {

// Pure-tail envelope (2/pi^{1/4}) z^{-3/2}, normalized so that
// C^2(z) z^3 = 4/sqrt(pi). Used only to cross-validate closed-form
// information expressions against quadrature; not a model envelope.
double envelope_tail_power(double z);

// Coefficients g_k of the large-z expansion
//   C^2(z) z^3 = sum_k g_k z^{-k/2}
// for the power-law envelope. Converges fast for z >= ~8.
std::span<const double> tail_squared_coefficients();

// Branch thresholds, exposed for the continuity tests.
inline constexpr double kPowerLawSeriesMax = 0.03;
inline constexpr double kPowerLawAsymptoticMin = 30.0;

}  // namespace detail

}  // namespace nanonmr
