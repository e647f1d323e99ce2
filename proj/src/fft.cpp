#include "nanonmr/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nanonmr {

std::size_t next_pow2(std::size_t n)
{
    std::size_t p = 1;
    while (p < n)
        p <<= 1;
    return p;
}

void fft_inplace(std::vector<std::complex<double>>& data, bool inverse)
{
    const std::size_t n = data.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft_inplace: size must be a power of two");

    // bit reversal
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1)
            j ^= bit;
        j ^= bit;
        if (i < j)
            std::swap(data[i], data[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * std::numbers::pi_v<double> / static_cast<double>(len)
                           * (inverse ? 1.0 : -1.0);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> u = data[i + j];
                const std::complex<double> v = data[i + j + len / 2] * w;
                data[i + j] = u + v;
                data[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }

    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& c : data)
            c *= inv;
    }
}

std::vector<double> autocovariance_fft(const std::vector<double>& x, std::size_t max_lag)
{
    const std::size_t n = x.size();
    if (n < 2)
        throw std::invalid_argument("autocovariance_fft: need at least 2 samples");
    if (max_lag >= n)
        throw std::invalid_argument("autocovariance_fft: max_lag must be < N");

    double mean = 0.0;
    for (double v : x)
        mean += v;
    mean /= static_cast<double>(n);

    const std::size_t m = next_pow2(2 * n);
    std::vector<std::complex<double>> buf(m, {0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i)
        buf[i] = {x[i] - mean, 0.0};
    fft_inplace(buf, false);
    for (auto& c : buf)
        c = {std::norm(c), 0.0};
    fft_inplace(buf, true);

    std::vector<double> r(max_lag + 1);
    for (std::size_t k = 0; k <= max_lag; ++k)
        r[k] = buf[k].real() / static_cast<double>(n);
    return r;
}

std::vector<double> autocovariance_direct(const std::vector<double>& x, std::size_t max_lag)
{
    const std::size_t n = x.size();
    if (n < 2 || max_lag >= n)
        throw std::invalid_argument("autocovariance_direct: bad sizes");
    double mean = 0.0;
    for (double v : x)
        mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> r(max_lag + 1, 0.0);
    for (std::size_t k = 0; k <= max_lag; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i + k < n; ++i)
            s += (x[i] - mean) * (x[i + k] - mean);
        r[k] = s / static_cast<double>(n);
    }
    return r;
}

}  // namespace nanonmr
