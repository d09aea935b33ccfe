#pragma once

#include <array>
#include <complex>
#include <iosfwd>
#include <vector>

#include "acstokes/fourier.hpp"

namespace acstokes {

using Vec2 = std::array<double, 2>;

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec2 operator*(double c, Vec2 a) { return {c * a[0], c * a[1]}; }
inline double dot(Vec2 a, Vec2 b) { return a[0] * b[0] + a[1] * b[1]; }
inline double cross(Vec2 a, Vec2 b) { return a[0] * b[1] - a[1] * b[0]; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }
/// Rotation by +90 degrees; maps the tangent to the normal.
inline Vec2 rot90(Vec2 a) { return {-a[1], a[0]}; }

/// Smooth closed plane curve, stored spectrally with a fixed even number of
/// Fourier modes. The parametrization is normalized on construction so that
/// n = rot90(tau) points out of the enclosed region; the enclosed region is
/// the "minus" phase and the signed distance is negative there. With that
/// orientation the curvature of a circle enclosing the minus phase is -1/R.
class ClosedCurve {
  public:
    static constexpr int kDefaultModes = 128;

    /// Build from spectral coefficients of the two components (any length;
    /// they are resampled to n_modes). Throws DegenerateParametrization or
    /// SelfIntersection if the sampled curve is invalid.
    ClosedCurve(std::vector<fourier::cd> coef_x, std::vector<fourier::cd> coef_y,
                double time_tag = 0.0, int n_modes = kDefaultModes);

    /// Build from point samples at s_j = j/m. The self-intersection scan is
    /// quadratic in the sample count; tight stepping loops may skip it and
    /// re-check at a coarser cadence.
    static ClosedCurve from_samples(const std::vector<Vec2>& points, double time_tag = 0.0,
                                    int n_modes = kDefaultModes, bool check_intersections = true);

    static ClosedCurve circle(Vec2 center, double radius, double time_tag = 0.0,
                              int n_modes = kDefaultModes);
    static ClosedCurve ellipse(Vec2 center, double a, double b, double time_tag = 0.0,
                               int n_modes = kDefaultModes);

    int n_modes() const { return n_; }
    double time_tag() const { return time_tag_; }

    Vec2 position(double s) const;
    Vec2 derivative(double s) const;         // dX0/ds
    Vec2 second_derivative(double s) const;  // d^2X0/ds^2
    double speed(double s) const { return norm(derivative(s)); }
    Vec2 tangent(double s) const;
    Vec2 normal(double s) const { return rot90(tangent(s)); }
    /// Curvature with respect to n = rot90(tau).
    double curvature(double s) const;
    /// d/ds of the metric |dX0/ds|.
    double speed_derivative(double s) const;
    /// d/ds of the curvature.
    double curvature_derivative(double s) const;

    double max_abs_curvature() const;
    double total_length() const;
    /// Signed enclosed area of the stored (normalized) parametrization.
    double enclosed_area() const;
    Vec2 centroid_of_samples() const;

    const std::vector<fourier::cd>& coef_x() const { return cx_; }
    const std::vector<fourier::cd>& coef_y() const { return cy_; }

    /// Uniform parameter samples s_j = j/m of the curve (m defaults to n_modes).
    std::vector<Vec2> sample(int m = 0) const;

    /// Batched geometry at the uniform samples (FFT resampling; much cheaper
    /// than pointwise evaluation in marker loops).
    struct GeometrySamples {
        std::vector<Vec2> position, tangent, normal;
        std::vector<double> speed, curvature;
    };
    GeometrySamples sample_geometry(int m = 0) const;

    /// Relative spectral tail mass in the top third of the modes; a resolution
    /// diagnostic used by the front-tracking solver.
    double tail_fraction() const;

    /// Plain-text serialization: version header, mode count, coefficient pairs.
    void save(std::ostream& os) const;
    static ClosedCurve load(std::istream& is);

    /// True if the stored orientation was flipped relative to the input.
    bool orientation_flipped() const { return flipped_; }

  private:
    ClosedCurve() = default;
    ClosedCurve(std::vector<fourier::cd> coef_x, std::vector<fourier::cd> coef_y, double time_tag,
                int n_modes, bool check_intersections);
    void validate(bool check_intersections) const;

    int n_ = 0;
    double time_tag_ = 0.0;
    bool flipped_ = false;
    std::vector<fourier::cd> cx_, cy_;    // position coefficients
    std::vector<fourier::cd> dx_, dy_;    // first-derivative coefficients
    std::vector<fourier::cd> ddx_, ddy_;  // second-derivative coefficients
};

/// Spec-facing constructor name: at least 3 modes, |dX0/ds| bounded away from 0.
ClosedCurve build_curve(const std::vector<fourier::cd>& coef_x,
                        const std::vector<fourier::cd>& coef_y, double t = 0.0,
                        int n_modes = ClosedCurve::kDefaultModes);

}  // namespace acstokes
