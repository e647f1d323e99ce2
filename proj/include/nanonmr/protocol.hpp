#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "nanonmr/envelopes.hpp"
#include "nanonmr/fisher.hpp"

namespace nanonmr {

namespace constants {
// electron gyromagnetic ratio, rad s^-1 T^-1 (CODATA magnitude)
inline constexpr double gamma_electron = 1.76085963023e11;
// 1H nuclear gyromagnetic ratio, rad s^-1 T^-1
inline constexpr double gamma_proton = 2.68e8;
// 1H gyromagnetic ratio in ordinary-frequency units, Hz/T
inline constexpr double gamma_proton_hz_per_tesla = 42.6e6;
inline constexpr double mu0 = 1.25663706212e-6;    // T m / A
inline constexpr double hbar = 1.054571817e-34;    // J s
}  // namespace constants

// Sensor and sample physics. Unset optional fields are NaN; t2 defaults to
// infinity (no sensor decoherence).
struct SensorPhysics {
    double gamma_sensor = constants::gamma_electron;   // rad s^-1 T^-1
    double gamma_nuclear = constants::gamma_proton;    // rad s^-1 T^-1
    double t2 = std::numeric_limits<double>::infinity();  // s
    double depth = std::numeric_limits<double>::quiet_NaN();         // m
    double spin_density = std::numeric_limits<double>::quiet_NaN();  // m^-3
    double b_rms = std::numeric_limits<double>::quiet_NaN();         // T

    // Checks positivity and, when depth, spin_density and b_rms are all
    // set, their mutual consistency within 1%.
    void validate() const;
};

// Cumulative readout fluorescence vs collection-window end for both spin
// states.
struct ReadoutTrace {
    std::vector<double> time_axis;  // s, strictly increasing window ends
    std::vector<double> counts0;    // expected photons per readout, state |0>
    std::vector<double> counts1;    // state |-1>

    void validate(Warnings* warnings = nullptr) const;
};

// --- undersampling ---------------------------------------------------------

// Minimum undersampling step 1/(f_L - f_delta).
double undersample_min_step(double f_larmor, double f_target);

struct UndersampleStep {
    double t_s = 0.0;  // s
    long k = 1;        // integer multiple of the minimum step
};

// k = round(t_delta / ((n_samples - 1) t_s,min)), clamped to k >= 1;
// t_s = k t_s,min.
UndersampleStep undersample_step(double f_larmor, double f_target, int n_samples);

// --- SNR --------------------------------------------------------------------

// sqrt(N) (eta0 - eta1) / sqrt(eta0 + eta1)
double snr_shot_noise(const ReadoutParams& readout, long n_measurements);
// equivalent contrast form sqrt(N) chi sqrt(eta0) / sqrt(2 - chi)
double snr_shot_noise_chi(const ReadoutParams& readout, long n_measurements);

// --- DD-duration optimization ------------------------------------------------

// Phi_rms = (2/pi) gamma_sensor B_rms tau
double phi_rms_from(double tau, const SensorPhysics& physics);

// B_rms^2 = rho (mu0 hbar gamma_n / 4 pi)^2 (5 pi / 96 d^3)
double brms_from_depth(double depth, double spin_density, const SensorPhysics& physics);
// exact algebraic inverse of the above
double depth_from_brms(double b_rms, double spin_density, const SensorPhysics& physics);

// (c/8) exp(-2 tau/T2) C(tau/T_D) (1 - exp(-2 Phi_rms^2)).
// Pass t_d = infinity for "no diffusion", physics.t2 = infinity for "no
// decoherence".
double qdyne_signal(double tau,
                    const SensorPhysics& physics,
                    const ReadoutParams& readout,
                    EnvelopeKind envelope,
                    double t_d);

// qdyne_signal scaled by the square root of the measurement rate,
// (tau_o + tau)^{-1/2}.
double qdyne_snr_rate(double tau,
                      double tau_o,
                      const SensorPhysics& physics,
                      const ReadoutParams& readout,
                      EnvelopeKind envelope,
                      double t_d);

enum class TauObjective { signal, snr_rate };

struct TauOptimum {
    double tau_star = 0.0;
    double value = 0.0;
    bool at_boundary = false;
};

// Generic scalar maximizer: 200-point log-spaced scan then golden-section
// refinement to relative tolerance rel_tol. Boundary maxima are flagged.
TauOptimum maximize_scalar(const std::function<double(double)>& f,
                           double lo,
                           double hi,
                           double rel_tol = 1e-4,
                           int scan_points = 200);

TauOptimum optimize_tau(TauObjective objective,
                        const SensorPhysics& physics,
                        const ReadoutParams& readout,
                        EnvelopeKind envelope,
                        double t_d,
                        double tau_lo,
                        double tau_hi,
                        double tau_o = 0.0);

// --- readout window -----------------------------------------------------------

struct ReadoutWindowResult {
    double t_snr = 0.0;     // window end maximizing c/sqrt(2 eta)
    double t_fisher = 0.0;  // window end maximizing c^2/(4 eta + c^2)
    std::size_t index_snr = 0;
    std::size_t index_fisher = 0;
    std::vector<double> merit_snr;
    std::vector<double> merit_fisher;
    bool degenerate = false;  // zero contrast everywhere
};

ReadoutWindowResult readout_window_optimize(const ReadoutTrace& trace,
                                            Warnings* warnings = nullptr);

// --- field-drift compensation ---------------------------------------------------

// Delta f_sample = f_sample * Delta f_L / f_L
double sample_rate_compensation(double f_larmor, double delta_f_larmor, double f_sample);

}  // namespace nanonmr
