#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nanonmr/envelopes.hpp"
#include "nanonmr/fisher.hpp"

namespace nanonmr {

enum class CountModel { Poisson, Bernoulli };

struct TraceConfig {
    CorrelationModel model;
    ReadoutParams readout;
    ProtocolTiming timing;
    std::int64_t n_measurements = 2;
    std::uint64_t seed = 0;
    CountModel count_model = CountModel::Poisson;
    // sensor coherence time; when set the contrast is attenuated to
    // c~ = c exp(-tau/t2)
    std::optional<double> t2;
    bool clamp_negative_mean = false;

    void validate(Warnings* warnings = nullptr) const;
};

struct TraceMeta {
    std::uint64_t seed = 0;
    std::uint64_t config_digest = 0;
};

struct PhotonTrace {
    std::vector<std::uint32_t> counts;  // one per measurement
    double spacing = 0.0;               // tau_tilde, s
    TraceMeta meta;

    double duration() const { return spacing * static_cast<double>(counts.size()); }
};

// Per-tau_w averaged alternating-readout contrast differences.
struct CsSweep {
    std::vector<double> tau_w_values;    // s, strictly increasing
    std::vector<double> contrast_means;  // averaged (n+ - n-) per tau_w
    long n_repeats = 0;
};

// FNV-1a digest of the canonically serialized configuration.
std::uint64_t config_digest(const TraceConfig& config);

// Two independent zero-mean stationary Gaussian sequences with
// autocovariance phi_rms^2 C(j dt / t_d), synthesized exactly by circulant
// embedding. Deterministic in (seed, n, dt, model).
std::pair<std::vector<double>, std::vector<double>> synthesize_amplitudes(
    std::int64_t n, double dt, const CorrelationModel& model, std::uint64_t seed,
    Warnings* warnings = nullptr);

// Phi_j = a_j cos(delta j dt) + b_j sin(delta j dt)
std::vector<double> phase_sequence(const std::vector<double>& a,
                                   const std::vector<double>& b,
                                   const CorrelationModel& model,
                                   double dt);

// Photon counts with mean eta - (c~/2) sin(Phi_j) at spacing tau_tilde.
PhotonTrace simulate_qdyne_trace(const TraceConfig& config, Warnings* warnings = nullptr);

// Alternating +/-y readout pairs at each waiting time; the averaged count
// difference estimates c Phi_rms^2 cos(delta t) C(t/T_D) at t = tau + tau_w.
CsSweep simulate_cs_sweep(const CorrelationModel& model,
                          const ReadoutParams& readout,
                          double tau,
                          const std::vector<double>& tau_w_values,
                          long n_repeats,
                          std::uint64_t seed);

}  // namespace nanonmr
