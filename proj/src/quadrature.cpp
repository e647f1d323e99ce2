#include "nanonmr/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace nanonmr {

namespace {

// Gauss-Kronrod 7/15 nodes mapped to [0, 1]; odd indices are the embedded
// 7-point Gauss nodes.
constexpr double kNodes[15] = {
    0.0042723144395936940576063989283284,
    0.025446043828620756865888097308925,
    0.067567788320115451661251881887438,
    0.12923440720030276995800022632466,
    0.20695638226615442611944217787823,
    0.29707742431130140792205907018797,
    0.3961075224960507457083735971537,
    0.5,
    0.6038924775039492542916264028463,
    0.7029225756886985365667896985542,
    0.79304361773384557388055782212177,
    0.87076559279969723004199977367534,
    0.93243221167988454833874811811256,
    0.97455395617137918762296067143325,
    0.99572768556040625043124236981384,
};

constexpr double kKronrodW[15] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
};

constexpr double kGaussW[7] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
};

struct Panel {
    double lo, hi;
    double value;
    double error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

Panel evaluate_panel(const std::function<double(double)>& f, double lo, double hi)
{
    const double width = hi - lo;
    double kron = 0.0;
    double gauss = 0.0;
    for (int i = 0; i < 15; ++i) {
        const double y = f(lo + width * kNodes[i]);
        kron += kKronrodW[i] * y;
        if (i & 1)
            gauss += kGaussW[i / 2] * y;
    }
    // weights are normalized for [-1, 1]; the affine map contributes width/2
    kron *= 0.5 * width;
    gauss *= 0.5 * width;
    return Panel{lo, hi, kron, std::abs(kron - gauss)};
}

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    std::span<const double> breakpoints,
                                    double abs_tol,
                                    double rel_tol,
                                    int max_intervals)
{
    if (breakpoints.size() < 2)
        throw std::invalid_argument("integrate_adaptive: need at least two breakpoints");

    QuadratureResult result;
    std::priority_queue<Panel> queue;
    double total = 0.0;
    double total_err = 0.0;

    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        if (!(breakpoints[i] < breakpoints[i + 1]))
            throw std::invalid_argument("integrate_adaptive: breakpoints must increase");
        Panel p = evaluate_panel(f, breakpoints[i], breakpoints[i + 1]);
        result.n_evaluations += 15;
        total += p.value;
        total_err += p.error;
        queue.push(p);
    }

    int n_panels = static_cast<int>(breakpoints.size()) - 1;
    while (total_err > std::max(abs_tol, rel_tol * std::abs(total)) && n_panels < max_intervals) {
        Panel worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (mid <= worst.lo || mid >= worst.hi) {
            // interval collapsed to machine precision; keep its estimate
            queue.push(worst);
            break;
        }
        Panel left = evaluate_panel(f, worst.lo, mid);
        Panel right = evaluate_panel(f, mid, worst.hi);
        result.n_evaluations += 30;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
        ++n_panels;
    }

    result.value = total;
    result.abs_error = total_err;
    result.converged = total_err <= std::max(abs_tol, rel_tol * std::abs(total));
    return result;
}

QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double lo,
                                    double hi,
                                    double abs_tol,
                                    double rel_tol,
                                    int max_intervals)
{
    const double pts[2] = {lo, hi};
    return integrate_adaptive(f, pts, abs_tol, rel_tol, max_intervals);
}

std::vector<double> oscillation_breakpoints(double lo, double hi, double max_width, bool log_refine_low)
{
    if (!(hi > lo))
        throw std::invalid_argument("oscillation_breakpoints: requires hi > lo");
    std::vector<double> pts;
    pts.push_back(lo);
    if (log_refine_low && lo == 0.0) {
        // geometric ladder from well below any feature scale
        for (double p = 1e-8 * hi; p < std::min(hi, max_width); p *= 10.0)
            pts.push_back(p);
    }
    if (std::isfinite(max_width) && max_width > 0.0) {
        const double span = hi - pts.back();
        const long n = std::lround(std::ceil(span / max_width));
        if (n > 4'000'000)
            throw std::invalid_argument("oscillation_breakpoints: panel count too large");
        const double start = pts.back();
        for (long i = 1; i < n; ++i)
            pts.push_back(start + span * static_cast<double>(i) / static_cast<double>(n));
    }
    pts.push_back(hi);
    return pts;
}

}  // namespace nanonmr
