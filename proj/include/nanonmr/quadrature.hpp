#pragma once

#include <functional>
#include <span>
#include <vector>

namespace nanonmr {

struct QuadratureResult {
    double value = 0.0;
    double abs_error = 0.0;  // estimated absolute error
    bool converged = true;
    long n_evaluations = 0;
};

// Globally adaptive Gauss-Kronrod 7/15 integration over the union of
// [breakpoints[i], breakpoints[i+1]]. The worst interval is bisected until
// the summed error estimate meets max(abs_tol, rel_tol * |value|) or the
// interval budget runs out (then converged = false and the achieved error
// is reported).
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    std::span<const double> breakpoints,
                                    double abs_tol,
                                    double rel_tol = 1e-12,
                                    int max_intervals = 100000);

QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double lo,
                                    double hi,
                                    double abs_tol,
                                    double rel_tol = 1e-12,
                                    int max_intervals = 100000);

// Breakpoint builder for oscillatory integrands: panels no wider than
// max_width on [lo, hi], optionally preceded by a log-spaced refinement
// toward lo (for integrands varying fast near the lower end).
std::vector<double> oscillation_breakpoints(double lo,
                                            double hi,
                                            double max_width,
                                            bool log_refine_low = false);

}  // namespace nanonmr
