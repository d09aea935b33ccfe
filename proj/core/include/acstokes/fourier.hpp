#pragma once

#include <complex>
#include <vector>

namespace acstokes::fourier {

using cd = std::complex<double>;

/// Signed frequency of DFT bin k for length n (Nyquist mapped to +n/2).
inline int signed_freq(int k, int n) { return (2 * k <= n) ? k : k - n; }

/// Forward transform of real samples on [0,1): c_k = (1/n) sum_j x_j e^{-2 pi i j k / n}.
std::vector<cd> forward(const std::vector<double>& samples);

/// Inverse transform: x_j = sum_k c_k e^{+2 pi i j k / n}. Imaginary parts are dropped.
std::vector<double> inverse(const std::vector<cd>& coef);

/// Unnormalized in-place complex DFT (sign = -1 forward, +1 backward).
void dft(std::vector<cd>& data, int sign);

/// Spectral derivative of given order: multiply by (2 pi i k)^order, Nyquist zeroed.
std::vector<cd> derivative(const std::vector<cd>& coef, int order = 1);

/// Trigonometric interpolation of a real series at s in [0,1).
double eval(const std::vector<cd>& coef, double s);

/// Zero all modes with |signed freq| > keep (used for dealiasing / mode truncation).
void truncate(std::vector<cd>& coef, int keep);

/// Resample a real series onto m uniform points via trig interpolation (FFT pad/trim).
std::vector<double> resample(const std::vector<cd>& coef, int m);

}  // namespace acstokes::fourier
