#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nanonmr/envelopes.hpp"
#include "nanonmr/quadrature.hpp"

namespace nanonmr {

// Collector for non-fatal diagnostics (precondition soft violations,
// clipped eigenvalues, ...). Pass nullptr to ignore.
struct Warnings {
    std::vector<std::string> messages;
    void add(std::string msg) { messages.push_back(std::move(msg)); }
};

inline void warn(Warnings* w, std::string msg)
{
    if (w)
        w->add(std::move(msg));
}

// Expected photon numbers for the two spin states and the derived
// readout quality factors.
struct ReadoutParams {
    double eta0 = 0.04;  // photons/readout, state |0>
    double eta1 = 0.03;  // photons/readout, state |1>

    void validate() const;
    double eta() const { return 0.5 * (eta0 + eta1); }
    double contrast() const { return eta0 - eta1; }
    double chi() const { return (eta0 - eta1) / eta0; }
    // c^2/(4 eta + c^2), the readout factor of the single-measurement
    // information; Qdyne carries its square.
    double fisher_factor() const
    {
        const double c = contrast();
        return c * c / (4.0 * eta() + c * c);
    }
};

struct ProtocolTiming {
    double tau = 10e-6;      // phase-acquisition (DD) duration, s
    double tau_o = 0.0;      // per-measurement overhead, s
    double total_time = 1.0; // experiment duration T, s

    void validate() const;
    double tau_tilde() const { return tau + tau_o; }
};

enum class FisherMethod {
    quadrature,
    riemann_sum,
    closed_form,
};

struct FisherResult {
    double value = 0.0;  // information about delta, s^2
    FisherMethod method = FisherMethod::quadrature;
    double abs_error_estimate = 0.0;
    bool converged = true;
};

// Envelope selector for the information kernels. TailPower is the
// validation-only pure tail used to cross-check closed forms; it is not a
// CorrelationModel envelope.
enum class InformationEnvelope {
    PowerLaw,
    Exponential,
    TailPower,
};

InformationEnvelope information_envelope(EnvelopeKind kind);

// --- single-measurement information densities ----------------------------

// i_CS = c^2/(4 eta + c^2) Phi^4 t^2 sin^2(delta t) C^2(t/T_D)
double fisher_single_cs(const CorrelationModel& model, const ReadoutParams& readout, double t);

// i_Qd = [c^2/(4 eta + c^2)]^2 Phi^4 t^2 sin^2(delta t) C^2(t/T_D)
double fisher_single_qdyne(const CorrelationModel& model, const ReadoutParams& readout, double t);

// --- totals, quadrature ---------------------------------------------------

// I_CS = [c^2/(4 eta+c^2)] Phi^4 T T_D int_0^1 t^2 sin^2(delta T_D t) C^2(t) dt
FisherResult fisher_total_cs_numeric(const CorrelationModel& model,
                                     const ReadoutParams& readout,
                                     const ProtocolTiming& timing,
                                     Warnings* warnings = nullptr);

// I_Qd = [c^2/(4 eta+c^2)]^2 Phi^4 (T_D^4/tau~^2)
//        int_0^{T/T_D} (T/T_D - z) z^2 sin^2(delta T_D z) C^2(z) dz
FisherResult fisher_total_qdyne_numeric(const CorrelationModel& model,
                                        const ReadoutParams& readout,
                                        const ProtocolTiming& timing,
                                        Warnings* warnings = nullptr);

// Same integrals with the envelope forced (validation path).
FisherResult fisher_total_cs_numeric_env(const CorrelationModel& model,
                                         const ReadoutParams& readout,
                                         const ProtocolTiming& timing,
                                         InformationEnvelope env,
                                         Warnings* warnings = nullptr);
FisherResult fisher_total_qdyne_numeric_env(const CorrelationModel& model,
                                            const ReadoutParams& readout,
                                            const ProtocolTiming& timing,
                                            InformationEnvelope env,
                                            Warnings* warnings = nullptr);

// --- totals, brute-force sums (oracles for the integrals) ----------------

// Left-endpoint Riemann sum of the normalized CS integral with one term per
// measurement (N = T/T_D shots sweeping the separation grid j/N in [0,1)).
FisherResult fisher_total_cs_sum(const CorrelationModel& model,
                                 const ReadoutParams& readout,
                                 const ProtocolTiming& timing);

// Pair-count weighted sum over measurement separations:
//   sum_j (T/tau~ - j) (j tau~)^2 sin^2(delta j tau~) C^2(j tau~ / T_D)
FisherResult fisher_total_qdyne_sum(const CorrelationModel& model,
                                    const ReadoutParams& readout,
                                    const ProtocolTiming& timing);

// --- totals, closed forms -------------------------------------------------

// Power-law tail closed forms. Full form:
//   (2/sqrt(pi)) [c^2/(4 eta+c^2)] Phi^4 T_D T (gamma - Ci(2 delta T_D) + ln(2 delta T_D));
// small-delta: (2/sqrt(pi)) [c^2/(4 eta+c^2)] Phi^4 T_D^3 T delta^2.
FisherResult fisher_total_cs_closed_powerlaw(const CorrelationModel& model,
                                             const ReadoutParams& readout,
                                             const ProtocolTiming& timing,
                                             bool small_delta = false);

// (2/sqrt(pi)) [c^2/(4 eta+c^2)]^2 Phi^4 T_D^3 T ln(delta T) / tau~^2,
// valid for delta T > 1 and delta T_D < 1.
FisherResult fisher_total_qdyne_closed_powerlaw(const CorrelationModel& model,
                                                const ReadoutParams& readout,
                                                const ProtocolTiming& timing,
                                                Warnings* warnings = nullptr);

// Exact exponential-envelope expressions (and their small-delta limits).
FisherResult fisher_total_cs_closed_exponential(const CorrelationModel& model,
                                                const ReadoutParams& readout,
                                                const ProtocolTiming& timing,
                                                bool small_delta = false);
FisherResult fisher_total_qdyne_closed_exponential(const CorrelationModel& model,
                                                   const ReadoutParams& readout,
                                                   const ProtocolTiming& timing,
                                                   bool small_delta = false);

// --- ratio and resolvability ----------------------------------------------

enum class RatioMethod {
    quadrature,
    riemann_sum,
    closed_form,
    approximate,  // [c^2/(4 eta+c^2)] ln(delta T) / (delta^2 tau~^2)
};

struct RatioResult {
    double value = 0.0;
    bool cs_underflow = false;  // I_CS underflowed; value is +inf
    FisherResult info_cs;
    FisherResult info_qdyne;
};

RatioResult ratio_r_delta(const CorrelationModel& model,
                          const ReadoutParams& readout_cs,
                          const ReadoutParams& readout_qd,
                          const ProtocolTiming& timing_cs,
                          const ProtocolTiming& timing_qd,
                          RatioMethod method,
                          Warnings* warnings = nullptr);

// Rayleigh-criterion resolvability: information exceeds 4/delta^2.
bool rayleigh_resolvable(double info, double delta);

// --- parameter-plane map ----------------------------------------------------

enum class SweepAxis {
    Delta,      // rad/s
    TDiffusion, // s
    TauTilde,   // s (Qdyne period; tau_o kept fixed)
    Chi,        // relative contrast; eta0 kept fixed
    TotalTime,  // s
};

struct GridSpec {
    SweepAxis x_axis = SweepAxis::Delta;
    std::vector<double> x_values;
    SweepAxis y_axis = SweepAxis::TDiffusion;
    std::vector<double> y_values;

    CorrelationModel model;
    ReadoutParams readout_cs;
    ReadoutParams readout_qd;
    ProtocolTiming timing_cs;
    ProtocolTiming timing_qd;

    // If set, delta is slaved to T_D cell-by-cell: delta = 2 pi p / T_D.
    std::optional<double> delta_td_product;
};

struct GridCell {
    double x = 0.0;
    double y = 0.0;
    bool ok = false;
    std::string error;  // failure note when !ok
    double r_delta = 0.0;
    bool cs_underflow = false;
    double i_cs = 0.0;
    double i_qd = 0.0;
    double err_cs = 0.0;
    double err_qd = 0.0;
    bool resolvable_cs = false;
    bool resolvable_qd = false;
};

struct GridMap {
    GridSpec spec;
    std::vector<GridCell> cells;  // row-major: y outer, x inner
};

// Deterministic row-major map of R_delta and resolvability, quadrature
// method per cell; cells may be evaluated in parallel, failures are flagged
// in place and never abort the map.
GridMap grid_map(const GridSpec& spec);

}  // namespace nanonmr
