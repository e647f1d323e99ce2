#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace nanonmr {

// In-place iterative radix-2 complex FFT; size must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& data, bool inverse);

std::size_t next_pow2(std::size_t n);

// Mean-subtracted biased autocovariance r_k = (1/N) sum (x_i - m)(x_{i+k} - m),
// k = 0..max_lag, via zero-padded FFT. O(N log N).
std::vector<double> autocovariance_fft(const std::vector<double>& x, std::size_t max_lag);

// Direct O(N^2) reference for the above (oracle in tests, small N only).
std::vector<double> autocovariance_direct(const std::vector<double>& x, std::size_t max_lag);

}  // namespace nanonmr
