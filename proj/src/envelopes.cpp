#include "nanonmr/envelopes.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "nanonmr/special_functions.hpp"

namespace nanonmr {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;
constexpr double kFourOverSqrtPi = 4.0 / kSqrtPi;

// ---- small-z expansion -------------------------------------------------
//
// Substituting the large-argument expansion of erfcx(1/sqrt(z)) into the
// closed form cancels the z^{-3/2}, z^{-1/2} and z^{1/2} singular terms
// exactly and leaves
//   C(z) = 1 - 6 z + (4/sqrt(pi)) sum_{m>=1} (-1)^{m+1} b_m z^{m+1/2},
//   b_m = a_{m+2} + a_{m+1} + (7/4) a_m + (3/2) a_{m-1},
//   a_k = (2k-1)!!/2^k.
// The sum is asymptotic; terms shrink until m ~ 1/z, which leaves a
// truncation floor ~ exp(-1/z). Below z = 0.03 that floor is < 1e-12.

constexpr int kSeriesTerms = 44;

const std::array<double, kSeriesTerms>& series_b_table()
{
    static const std::array<double, kSeriesTerms> table = [] {
        std::array<double, kSeriesTerms + 3> a{};
        a[0] = 1.0;
        for (int k = 0; k < kSeriesTerms + 2; ++k)
            a[k + 1] = a[k] * (2.0 * k + 1.0) / 2.0;
        std::array<double, kSeriesTerms> b{};
        for (int m = 1; m < kSeriesTerms; ++m)
            b[m] = a[m + 2] + a[m + 1] + 1.75 * a[m] + 1.5 * a[m - 1];
        return b;
    }();
    return table;
}

double power_law_series(double z)
{
    const auto& b = series_b_table();
    double sum = 0.0;
    double zpow = z * std::sqrt(z);  // z^{m+1/2} carried incrementally
    double prev_mag = std::numeric_limits<double>::max();
    for (int m = 1; m < kSeriesTerms; ++m) {
        const double term = ((m & 1) ? b[m] : -b[m]) * zpow;
        const double mag = std::abs(term);
        if (mag > prev_mag)
            break;  // asymptotic turnover
        sum += term;
        if (mag < 1e-18)
            break;
        prev_mag = mag;
        zpow *= z;
    }
    return 1.0 - 6.0 * z + kFourOverSqrtPi * sum;
}

// ---- direct closed form ------------------------------------------------

double power_law_direct(double z)
{
    const double s = std::sqrt(z);
    const double x = 1.0 / s;  // erfcx argument
    const double bracket = 1.0 / (z * s) - 1.5 / s + 0.25 * kSqrtPi + 3.0 * s
                           - 1.5 * kSqrtPi * z
                           + kSqrtPi * x * erfcx(x)
                                 * (-1.0 / (z * s) + 1.0 / s - 1.75 * s + 1.5 * z * s);
    return kFourOverSqrtPi * bracket;
}

// ---- large-z expansion -------------------------------------------------
//
// Writing x = z^{-1/2} and splitting erfcx(x) = e^{x^2} - (2/sqrt(pi)) S(x)
// with the entire Dawson-type series S(x) = sum_k 2^k x^{2k+1}/(2k+1)!!
// rearranges the bracket into a series in x that converges for every x:
//   bracket = sum_{n>=1} o_n x^{2n+1} + sum_{n>=2} e_n x^{2n},
//   o_n = [n=1] - 3 s_{n+1} + (7/2) s_n - 2 s_{n-1} + 2 s_{n-2},
//   e_n = sqrt(pi) (3/2/(n+1)! - 7/4/n! + 1/(n-1)! - 1/(n-2)!),
//   s_k = 2^k/(2k+1)!!.
// Coefficients decay factorially, so a short tail is exact for z >= ~8.

constexpr int kAsymTerms = 16;

struct AsymTables {
    std::array<double, kAsymTerms> odd{};   // o_n, n = 1..
    std::array<double, kAsymTerms> even{};  // e_n, n = 2..
};

const AsymTables& asym_tables()
{
    static const AsymTables t = [] {
        AsymTables out;
        std::array<double, kAsymTerms + 3> s{};
        s[0] = 1.0;
        for (int k = 0; k < kAsymTerms + 2; ++k)
            s[k + 1] = s[k] * 2.0 / (2.0 * k + 3.0);
        std::array<double, kAsymTerms + 3> fact{};
        fact[0] = 1.0;
        for (int k = 0; k < kAsymTerms + 2; ++k)
            fact[k + 1] = fact[k] * (k + 1.0);
        for (int n = 1; n < kAsymTerms; ++n) {
            double o = (n == 1) ? 1.0 : 0.0;
            o += -3.0 * s[n + 1] + 3.5 * s[n] - 2.0 * s[n - 1];
            if (n >= 2)
                o += 2.0 * s[n - 2];
            out.odd[n] = o;
        }
        for (int n = 2; n < kAsymTerms; ++n)
            out.even[n] = kSqrtPi
                          * (1.5 / fact[n + 1] - 1.75 / fact[n] + 1.0 / fact[n - 1]
                             - 1.0 / fact[n - 2]);
        return out;
    }();
    return t;
}

double power_law_asymptotic(double z)
{
    const auto& t = asym_tables();
    const double x2 = 1.0 / z;
    const double x = std::sqrt(x2);
    double sum = 0.0;
    double xo = x * x2;  // x^{2n+1}, n = 1
    for (int n = 1; n < kAsymTerms; ++n) {
        sum += t.odd[n] * xo;
        xo *= x2;
    }
    double xe = x2 * x2;  // x^{2n}, n = 2
    for (int n = 2; n < kAsymTerms; ++n) {
        sum += t.even[n] * xe;
        xe *= x2;
    }
    return kFourOverSqrtPi * sum;
}

}  // namespace

void NuisanceDecay::validate() const
{
    if (!(t_exp > 0.0))
        throw std::invalid_argument("NuisanceDecay: t_exp must be > 0");
    if (!std::isfinite(amplitude) || !std::isfinite(offset))
        throw std::invalid_argument("NuisanceDecay: amplitude/offset must be finite");
}

void CorrelationModel::validate() const
{
    if (!(phi_rms >= 0.0))
        throw std::invalid_argument("CorrelationModel: phi_rms must be >= 0");
    if (!(t_d > 0.0))
        throw std::invalid_argument("CorrelationModel: t_d must be > 0");
    if (!(delta >= 0.0))
        throw std::invalid_argument("CorrelationModel: delta must be >= 0");
    if (nuisance)
        nuisance->validate();
}

double envelope_power_law(double z)
{
    if (!(z >= 0.0))
        throw std::domain_error("envelope_power_law: requires z >= 0");
    if (z == 0.0)
        return 1.0;
    if (std::isinf(z))
        return 0.0;

    double value;
    if (z < detail::kPowerLawSeriesMax)
        value = power_law_series(z);
    else if (z <= detail::kPowerLawAsymptoticMin)
        value = power_law_direct(z);
    else
        value = power_law_asymptotic(z);

    if (!std::isfinite(value))
        throw std::runtime_error("envelope_power_law: non-finite result at z=" + std::to_string(z));
    return value;
}

double envelope_exponential(double z)
{
    if (!(z >= 0.0))
        throw std::domain_error("envelope_exponential: requires z >= 0");
    return std::exp(-z);
}

double covariance(const CorrelationModel& model, double t)
{
    if (!(t >= 0.0))
        throw std::domain_error("covariance: requires t >= 0");
    model.validate();

    const double z = t / model.t_d;
    const double env = (model.kind == EnvelopeKind::PowerLawDiffusion)
                           ? envelope_power_law(z)
                           : envelope_exponential(z);
    // Evaluate the envelope first: if it has fully decayed the oscillatory
    // factor is irrelevant (and cos(delta * inf) would be indeterminate).
    double value = 0.0;
    if (env != 0.0)
        value = model.phi_rms * model.phi_rms * std::cos(model.delta * t) * env;
    if (model.nuisance) {
        const auto& n = *model.nuisance;
        value += n.amplitude * std::exp(-t / n.t_exp) + n.offset;
    }
    return value;
}

namespace detail {

double envelope_tail_power(double z)
{
    if (!(z > 0.0))
        throw std::domain_error("envelope_tail_power: requires z > 0");
    // sqrt(4/sqrt(pi)) * z^{-3/2}
    static const double amp = std::sqrt(kFourOverSqrtPi);
    return amp / (z * std::sqrt(z));
}

std::span<const double> tail_squared_coefficients()
{
    // C(z) z^{3/2} = sum_m h_m x^m with x = z^{-1/2},
    //   h_{2j}   = (4/sqrt(pi)) o_{j+1},
    //   h_{2j+1} = (4/sqrt(pi)) e_{j+2};
    // squaring gives the g_k by convolution.
    static const std::vector<double> g = [] {
        const auto& t = asym_tables();
        const int nh = 2 * (kAsymTerms - 1) - 1;
        std::vector<double> h(nh, 0.0);
        for (int j = 0; 2 * j < nh; ++j)
            h[2 * j] = kFourOverSqrtPi * t.odd[j + 1];
        for (int j = 0; 2 * j + 1 < nh && j + 2 < kAsymTerms; ++j)
            h[2 * j + 1] = kFourOverSqrtPi * t.even[j + 2];
        std::vector<double> out(nh, 0.0);
        for (int i = 0; i < nh; ++i)
            for (int j = 0; i + j < nh; ++j)
                out[i + j] += h[i] * h[j];
        return out;
    }();
    return {g.data(), g.size()};
}

}  // namespace detail

}  // namespace nanonmr
