#pragma once

#include <functional>
#include <vector>

namespace nanonmr {

// Residual evaluator: fills r (size n_residuals) from p (size n_params).
using ResidualFn = std::function<void(const std::vector<double>&, std::vector<double>&)>;

struct LMOptions {
    int max_iterations = 200;
    double ftol = 1e-12;        // relative SSR improvement
    double xtol = 1e-11;        // relative step size
    double lambda0 = 1e-3;      // initial damping
};

struct LMResult {
    std::vector<double> params;
    double ssr = 0.0;
    bool converged = false;
    int iterations = 0;
    // diag of s^2 (J^T J)^{-1}; empty if the normal matrix was singular
    std::vector<double> variances;
};

// Damped least squares with forward-difference Jacobian and box clamping.
LMResult levenberg_marquardt(const ResidualFn& fn,
                             std::size_t n_residuals,
                             std::vector<double> p0,
                             const std::vector<double>& lower,
                             const std::vector<double>& upper,
                             const LMOptions& options = {});

}  // namespace nanonmr
