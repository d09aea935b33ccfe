#pragma once

#include <vector>

#include "acstokes/fourier.hpp"

namespace acstokes {

/// Real function on T^1 stored as Fourier coefficients, tagged with a time.
class SurfaceField {
  public:
    SurfaceField() = default;
    explicit SurfaceField(int n_modes, double time_tag = 0.0)
        : time_tag_(time_tag), coef_(static_cast<size_t>(n_modes), fourier::cd(0.0, 0.0)) {}

    static SurfaceField from_samples(const std::vector<double>& values, double time_tag = 0.0);
    static SurfaceField constant(double value, int n_modes, double time_tag = 0.0);

    int n_modes() const { return static_cast<int>(coef_.size()); }
    double time_tag() const { return time_tag_; }
    void set_time_tag(double t) { time_tag_ = t; }

    const std::vector<fourier::cd>& coef() const { return coef_; }
    std::vector<fourier::cd>& coef() { return coef_; }

    double eval(double s) const { return fourier::eval(coef_, s); }
    std::vector<double> samples() const { return fourier::inverse(coef_); }
    SurfaceField derivative(int order = 1) const;

    double max_abs() const;
    double l2_norm() const;  // continuous L^2(T^1) norm

    /// Enforce conjugate symmetry (drop imaginary leakage from real-space ops).
    void make_real();

    SurfaceField& operator+=(const SurfaceField& o);
    SurfaceField& operator*=(double c);

  private:
    double time_tag_ = 0.0;
    std::vector<fourier::cd> coef_;
};

}  // namespace acstokes
