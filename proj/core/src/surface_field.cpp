#include "acstokes/surface_field.hpp"

#include <cmath>

#include "acstokes/errors.hpp"

namespace acstokes {

SurfaceField SurfaceField::from_samples(const std::vector<double>& values, double time_tag) {
    SurfaceField f;
    f.time_tag_ = time_tag;
    f.coef_ = fourier::forward(values);
    return f;
}

SurfaceField SurfaceField::constant(double value, int n_modes, double time_tag) {
    SurfaceField f(n_modes, time_tag);
    f.coef_[0] = value;
    return f;
}

SurfaceField SurfaceField::derivative(int order) const {
    SurfaceField out;
    out.time_tag_ = time_tag_;
    out.coef_ = fourier::derivative(coef_, order);
    return out;
}

double SurfaceField::max_abs() const {
    double m = 0.0;
    for (double v : samples()) m = std::max(m, std::abs(v));
    return m;
}

double SurfaceField::l2_norm() const {
    double s = 0.0;
    for (const auto& c : coef_) s += std::norm(c);
    return std::sqrt(s);
}

void SurfaceField::make_real() {
    const int n = n_modes();
    for (int k = 1; 2 * k < n; ++k) {
        const fourier::cd avg = 0.5 * (coef_[k] + std::conj(coef_[n - k]));
        coef_[k] = avg;
        coef_[n - k] = std::conj(avg);
    }
    coef_[0] = coef_[0].real();
    if (n % 2 == 0) coef_[n / 2] = coef_[n / 2].real();
}

SurfaceField& SurfaceField::operator+=(const SurfaceField& o) {
    if (o.n_modes() != n_modes()) throw GridMismatch("surface field mode counts differ");
    for (int k = 0; k < n_modes(); ++k) coef_[k] += o.coef_[k];
    return *this;
}

SurfaceField& SurfaceField::operator*=(double c) {
    for (auto& v : coef_) v *= c;
    return *this;
}

}  // namespace acstokes
