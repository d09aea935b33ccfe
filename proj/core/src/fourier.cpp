#include "acstokes/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <stdexcept>

namespace acstokes::fourier {

namespace {

// Plans are cached per (size, sign). FFTW_UNALIGNED lets us execute on
// whatever buffer std::vector hands us.
fftw_plan plan_for(int n, int sign) {
    static std::map<std::pair<int, int>, fftw_plan> cache;
    auto key = std::make_pair(n, sign);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<cd> tmp(static_cast<size_t>(n));
    fftw_plan p = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(tmp.data()),
                                   reinterpret_cast<fftw_complex*>(tmp.data()), sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache.emplace(key, p);
    return p;
}

}  // namespace

void dft(std::vector<cd>& data, int sign) {
    if (data.empty()) throw std::invalid_argument("dft: empty input");
    fftw_plan p = plan_for(static_cast<int>(data.size()), sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(data.data()),
                     reinterpret_cast<fftw_complex*>(data.data()));
}

std::vector<cd> forward(const std::vector<double>& samples) {
    const size_t n = samples.size();
    std::vector<cd> c(n);
    for (size_t j = 0; j < n; ++j) c[j] = samples[j];
    dft(c, -1);
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& v : c) v *= inv;
    return c;
}

std::vector<double> inverse(const std::vector<cd>& coef) {
    std::vector<cd> c = coef;
    dft(c, +1);
    std::vector<double> x(c.size());
    for (size_t j = 0; j < c.size(); ++j) x[j] = c[j].real();
    return x;
}

std::vector<cd> derivative(const std::vector<cd>& coef, int order) {
    const int n = static_cast<int>(coef.size());
    std::vector<cd> out(coef.size());
    for (int k = 0; k < n; ++k) {
        const int kf = signed_freq(k, n);
        if (2 * kf == n) {  // Nyquist has no well-defined odd derivative
            out[k] = 0.0;
            continue;
        }
        cd factor(0.0, 2.0 * M_PI * kf);
        cd f = 1.0;
        for (int i = 0; i < order; ++i) f *= factor;
        out[k] = coef[k] * f;
    }
    return out;
}

double eval(const std::vector<cd>& coef, double s) {
    const int n = static_cast<int>(coef.size());
    double acc = coef[0].real();
    for (int k = 1; 2 * k < n; ++k) {
        const double ph = 2.0 * M_PI * k * s;
        acc += 2.0 * (coef[k].real() * std::cos(ph) - coef[k].imag() * std::sin(ph));
    }
    if (n % 2 == 0) acc += coef[n / 2].real() * std::cos(M_PI * n * s);
    return acc;
}

void truncate(std::vector<cd>& coef, int keep) {
    const int n = static_cast<int>(coef.size());
    for (int k = 0; k < n; ++k) {
        if (std::abs(signed_freq(k, n)) > keep) coef[k] = 0.0;
    }
}

std::vector<double> resample(const std::vector<cd>& coef, int m) {
    const int n = static_cast<int>(coef.size());
    std::vector<cd> padded(static_cast<size_t>(m), cd(0.0, 0.0));
    const int half = std::min(n, m) / 2;
    for (int k = -half + 1; k < half; ++k) {
        const int src = (k + n) % n;
        const int dst = (k + m) % m;
        padded[dst] = coef[src];
    }
    return inverse(padded);
}

}  // namespace acstokes::fourier
