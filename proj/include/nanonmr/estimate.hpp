#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "nanonmr/envelopes.hpp"
#include "nanonmr/fisher.hpp"
#include "nanonmr/simulate.hpp"

namespace nanonmr {

// Mean-subtracted biased autocorrelation on the lag grid tau_tilde..max_lag.
// Lag 0 is excluded: it carries shot-noise variance, not signal.
struct AutocorrResult {
    std::vector<double> lags;          // s, k * spacing, k = 1..L
    std::vector<double> values;
    std::vector<std::int64_t> n_pairs; // N - k per lag
    double spacing = 0.0;              // s
    bool mean_subtracted = true;
};

struct ParamBounds {
    double lower = 0.0;
    double upper = 1.0;
};

// Fit model: amp cos(delta t) C(t/T_D) [+ A exp(-t/t_exp) + offset].
// Parameter order: [amp, delta, t_d, A, t_exp, offset] (last three only
// when include_nuisance).
struct FitModelSpec {
    EnvelopeKind envelope = EnvelopeKind::PowerLawDiffusion;
    bool include_nuisance = false;
    ParamBounds amp;
    ParamBounds delta;
    ParamBounds t_d;
    ParamBounds nuisance_amp;
    ParamBounds nuisance_t_exp;
    ParamBounds nuisance_offset;

    std::size_t n_params() const { return include_nuisance ? 6 : 3; }
};

// Multistart initialization ranges derived from the data: delta within the
// lag grid's Nyquist band, T_D within [spacing, max lag], amplitude within
// [0, 2 max|ac|] near the origin.
FitModelSpec make_default_fit_spec(const AutocorrResult& ac,
                                   EnvelopeKind envelope,
                                   bool include_nuisance);

struct FitResult {
    std::vector<double> params;
    std::vector<double> param_errors;  // asymptotic standard errors
    double r_squared = 0.0;
    bool converged = false;
    int n_iterations = 0;
    std::vector<bool> at_bounds;

    double amp() const { return params.at(0); }
    double delta() const { return params.at(1); }
    double t_d() const { return params.at(2); }
};

struct EstimatorStats {
    std::vector<double> estimates;  // delta estimates, rad/s
    double mean = 0.0;
    double rmse = 0.0;              // rad/s
    std::vector<double> hist_edges;
    std::vector<std::int64_t> hist_counts;
    int n_failed = 0;               // fits excluded from the distribution
};

// FFT autocorrelation of a photon trace up to max_lag (seconds).
AutocorrResult autocorrelation(const PhotonTrace& trace, double max_lag);

// How consecutive blocks are combined into one grouped autocorrelation.
enum class GroupMode {
    AverageAutocorrelations,  // mean of the per-block autocorrelations
    ConcatenateBlocks,        // one autocorrelation of the joined counts
};

// Contiguous blocks of block_duration combined over consecutive groups of
// group_size; trailing remainders are dropped.
std::vector<AutocorrResult> slice_blocks(const PhotonTrace& trace,
                                         double block_duration,
                                         int group_size,
                                         double max_lag,
                                         GroupMode mode = GroupMode::AverageAutocorrelations);

// Multistart damped least squares; the best converged fit by R^2 wins.
FitResult fit_autocorrelation(const AutocorrResult& ac,
                              const FitModelSpec& spec,
                              int n_starts,
                              std::uint64_t seed);

EstimatorStats estimator_distribution(const std::vector<AutocorrResult>& grouped_acs,
                                      const FitModelSpec& spec,
                                      int n_starts,
                                      std::uint64_t seed,
                                      std::optional<double> reference_delta = {});

struct FourierBaseline {
    double peak_frequency = 0.0;  // Hz
    double half_fwhm = 0.0;       // Hz, FWHM/2 resolution proxy
};

// Magnitude spectrum of the evenly extended, zero-padded autocorrelation;
// peak by parabolic interpolation, FWHM by linear interpolation of the
// half-maximum crossings.
FourierBaseline fourier_baseline(const AutocorrResult& ac, int zero_pad_factor);

}  // namespace nanonmr
