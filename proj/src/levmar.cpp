#include "nanonmr/levmar.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nanonmr {

namespace {

// Cholesky solve of (A + lambda diag(A)) x = b; returns false if not SPD.
bool solve_damped(std::vector<double> a, std::vector<double> b, std::size_t n,
                  double lambda, std::vector<double>& x)
{
    for (std::size_t i = 0; i < n; ++i)
        a[i * n + i] *= 1.0 + lambda;
    // in-place Cholesky
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k)
                s -= a[i * n + k] * a[j * n + k];
            if (i == j) {
                if (s <= 0.0)
                    return false;
                a[i * n + i] = std::sqrt(s);
            } else {
                a[i * n + j] = s / a[j * n + j];
            }
        }
    }
    // forward/back substitution
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k)
            s -= a[i * n + k] * b[k];
        b[i] = s / a[i * n + i];
    }
    x.assign(n, 0.0);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k)
            s -= a[k * n + ii] * x[k];
        x[ii] = s / a[ii * n + ii];
    }
    return true;
}

double sum_sq(const std::vector<double>& r)
{
    double s = 0.0;
    for (double v : r)
        s += v * v;
    return s;
}

}  // namespace

LMResult levenberg_marquardt(const ResidualFn& fn,
                             std::size_t n_residuals,
                             std::vector<double> p0,
                             const std::vector<double>& lower,
                             const std::vector<double>& upper,
                             const LMOptions& options)
{
    const std::size_t np = p0.size();
    if (lower.size() != np || upper.size() != np)
        throw std::invalid_argument("levenberg_marquardt: bound size mismatch");
    for (std::size_t i = 0; i < np; ++i) {
        if (!(lower[i] < upper[i]))
            throw std::invalid_argument("levenberg_marquardt: requires lower < upper");
        p0[i] = std::clamp(p0[i], lower[i], upper[i]);
    }

    std::vector<double> r(n_residuals), r_trial(n_residuals);
    std::vector<double> jac(n_residuals * np);
    std::vector<double> jtj(np * np), jtr(np), step(np);

    fn(p0, r);
    double ssr = sum_sq(r);
    double lambda = options.lambda0;

    LMResult out;
    out.params = p0;
    out.ssr = ssr;

    int iter = 0;
    int stall = 0;
    for (; iter < options.max_iterations; ++iter) {
        // forward-difference Jacobian, steps kept inside the box
        for (std::size_t j = 0; j < np; ++j) {
            const double scale = std::max(std::abs(p0[j]), 1e-3 * (upper[j] - lower[j]));
            double h = 1.49e-8 * scale;  // sqrt(eps) * scale
            if (h == 0.0)
                h = 1.49e-8;
            std::vector<double> pj = p0;
            if (pj[j] + h > upper[j])
                h = -h;
            pj[j] += h;
            fn(pj, r_trial);
            for (std::size_t i = 0; i < n_residuals; ++i)
                jac[i * np + j] = (r_trial[i] - r[i]) / h;
        }
        for (std::size_t a = 0; a < np; ++a) {
            jtr[a] = 0.0;
            for (std::size_t b = a; b < np; ++b) {
                double s = 0.0;
                for (std::size_t i = 0; i < n_residuals; ++i)
                    s += jac[i * np + a] * jac[i * np + b];
                jtj[a * np + b] = jtj[b * np + a] = s;
            }
            for (std::size_t i = 0; i < n_residuals; ++i)
                jtr[a] += jac[i * np + a] * r[i];
        }

        bool improved = false;
        for (int tries = 0; tries < 12; ++tries) {
            if (!solve_damped(jtj, jtr, np, lambda, step)) {
                lambda *= 10.0;
                continue;
            }
            std::vector<double> p_trial(np);
            for (std::size_t j = 0; j < np; ++j)
                p_trial[j] = std::clamp(p0[j] - step[j], lower[j], upper[j]);
            fn(p_trial, r_trial);
            const double ssr_trial = sum_sq(r_trial);
            if (ssr_trial < ssr) {
                double max_rel_step = 0.0;
                for (std::size_t j = 0; j < np; ++j)
                    max_rel_step = std::max(max_rel_step,
                                            std::abs(p_trial[j] - p0[j])
                                                / (std::abs(p0[j]) + 1e-30));
                const double gain = (ssr - ssr_trial) / (ssr + 1e-300);
                p0 = std::move(p_trial);
                r = r_trial;
                ssr = ssr_trial;
                lambda = std::max(lambda / 3.0, 1e-12);
                improved = true;
                // two consecutive negligible accepted steps end the run;
                // a single one can just be a large-damping crawl
                if (gain < options.ftol && max_rel_step < options.xtol)
                    ++stall;
                else
                    stall = 0;
                break;
            }
            lambda *= 5.0;
        }
        if (!improved || stall >= 2) {
            // no downhill direction left at any damping, or progress has
            // genuinely stopped: local optimum
            out.converged = true;
            break;
        }
    }

    out.params = p0;
    out.ssr = ssr;
    out.iterations = iter + 1;

    // asymptotic parameter variances from the undamped normal matrix
    if (n_residuals > np) {
        std::vector<double> identity_col(np), inv_diag(np, 0.0);
        bool ok = true;
        for (std::size_t j = 0; j < np && ok; ++j) {
            std::vector<double> e(np, 0.0);
            e[j] = 1.0;
            ok = solve_damped(jtj, e, np, 0.0, identity_col);
            if (ok)
                inv_diag[j] = identity_col[j];
        }
        if (ok) {
            const double s2 = ssr / static_cast<double>(n_residuals - np);
            out.variances.resize(np);
            for (std::size_t j = 0; j < np; ++j)
                out.variances[j] = std::max(0.0, s2 * inv_diag[j]);
        }
    }
    return out;
}

}  // namespace nanonmr
