#include "nanonmr/special_functions.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace nanonmr {

double erfcx(double x)
{
    if (x < 0.0)
        throw std::domain_error("erfcx: negative argument");
    if (x < 6.0)
        return std::exp(x * x) * std::erfc(x);

    // erfcx(x) ~ 1/(x sqrt(pi)) * sum_n (-1)^n (2n-1)!!/(2x^2)^n.
    // At x >= 6 the terms drop below double epsilon long before the
    // asymptotic series turns.
    const double inv2x2 = 1.0 / (2.0 * x * x);
    double term = 1.0;
    double sum = 1.0;
    for (int n = 1; n < 40; ++n) {
        term *= -(2.0 * n - 1.0) * inv2x2;
        const double prev = sum;
        sum += term;
        if (sum == prev)
            break;
    }
    return sum * std::numbers::inv_sqrtpi_v<double> / x;
}

double cosine_integral(double x)
{
    if (!(x > 0.0))
        throw std::domain_error("cosine_integral: requires x > 0");

    constexpr double eps = std::numeric_limits<double>::epsilon();

    if (x <= 4.0) {
        // Ci(x) = gamma + ln x + sum_{k>=1} (-1)^k x^(2k) / (2k (2k)!)
        const double x2 = x * x;
        double term = 1.0;  // x^(2k) / (2k)! carried incrementally
        double sum = 0.0;
        for (int k = 1; k <= 60; ++k) {
            term *= x2 / ((2.0 * k - 1.0) * (2.0 * k));
            const double contrib = ((k & 1) ? -term : term) / (2.0 * k);
            sum += contrib;
            if (std::abs(contrib) < eps * (std::abs(sum) + 1e-300))
                break;
        }
        return std::numbers::egamma_v<double> + std::log(x) + sum;
    }

    // Continued fraction for E1(ix) by the modified Lentz method:
    //   E1(z) = e^{-z} / (z + 1 - 1/(z + 3 - 4/(z + 5 - 9/(...))))
    // and Ci(x) = -Re E1(ix).
    const std::complex<double> z(0.0, x);
    constexpr double fpmin = 1e-290;
    std::complex<double> b = z + 1.0;
    std::complex<double> c(1.0 / fpmin, 0.0);
    std::complex<double> d = 1.0 / b;
    std::complex<double> h = d;
    for (int i = 1; i <= 200; ++i) {
        const double a = -static_cast<double>(i) * static_cast<double>(i);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const std::complex<double> del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < eps)
            break;
    }
    const std::complex<double> e1 = std::complex<double>(std::cos(x), -std::sin(x)) * h;
    return -e1.real();
}

}  // namespace nanonmr
