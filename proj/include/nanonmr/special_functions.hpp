#pragma once

namespace nanonmr {

// Scaled complementary error function erfcx(x) = exp(x^2) erfc(x), x >= 0.
// Direct product below x = 6 (no overflow there), asymptotic series above.
double erfcx(double x);

// Cosine integral Ci(x) = gamma + ln x + int_0^x (cos t - 1)/t dt, x > 0.
// Power series for x <= 4, complex continued fraction for the exponential
// integral E1(ix) above. Absolute accuracy better than 1e-13 on [1e-300, 1e8].
double cosine_integral(double x);

}  // namespace nanonmr
