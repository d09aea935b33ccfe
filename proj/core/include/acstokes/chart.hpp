#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "acstokes/curve.hpp"

namespace acstokes {

struct SignedDistanceResult {
    double d = 0.0;      // signed distance, negative in the enclosed (minus) phase
    double s = 0.0;      // closest-point parameter in [0,1)
    bool clamped = false;  // true if the point lies outside the 3*delta tube
};

/// Tubular-neighborhood chart of a closed curve: closest-point projection,
/// signed distance, chart Jacobian, and the surface differential operators
/// restricted to the tube. Read-only after construction.
class TubularChart {
  public:
    /// delta <= 0 picks the default 0.3 / max|H| clamped by the domain box.
    explicit TubularChart(ClosedCurve curve, double delta = 0.0);

    const ClosedCurve& curve() const { return curve_; }
    double delta() const { return delta_; }

    /// Closest-point Newton seeded from a precomputed table. Points farther
    /// than 3*delta from the curve come back clamped with the sign only
    /// (|d| = 3*delta, side from a winding-number test).
    SignedDistanceResult signed_distance(Vec2 x) const;

    /// Chart map X(r,s) = X0(s) + r n(s).
    Vec2 chart_point(double r, double s) const {
        return curve_.position(s) + r * curve_.normal(s);
    }
    Vec2 project(Vec2 x) const;

    /// Area element of the chart map: |dX0/ds| (1 - r H(s)). Positive on the
    /// tube by the delta <= 0.3/max|H| guarantee (checked at construction).
    double jacobian(double r, double s) const;

    /// Exact in-tube Laplacian of the signed distance, -H/(1 - r H).
    double laplacian_distance(double r, double s) const;

    /// grad S at X(r,s): tau / (|dX0/ds| (1 - r H)).
    Vec2 grad_S(double r, double s) const;
    double grad_S_norm_sq(double r, double s) const;
    double laplacian_S(double r, double s) const;

    /// r-derivatives of the operator coefficients at r = 0, used by the
    /// inner-expansion bookkeeping.
    Vec2 d_dr_grad_S(double s) const;
    double d_dr_grad_S_norm_sq(double s) const;
    double d_dr_laplacian_S(double s) const;

    /// integral of f(r,s) J(r,s) ds dr over [-half_width, half_width] x T^1,
    /// Gauss-Legendre in r and spectral (trapezoid) in s.
    double tubular_quadrature(const std::function<double(double, double)>& f,
                              double half_width) const;

  private:
    void build_seed_table();
    double newton_closest(Vec2 x, double s0) const;
    bool point_inside(Vec2 x) const;

    ClosedCurve curve_;
    double delta_ = 0.0;

    // coarse closest-point seeds on a uniform box covering the tube
    Vec2 seed_lo_{0.0, 0.0};
    double seed_h_ = 1.0;
    int seed_n_ = 0;
    std::vector<float> seed_s_;
    std::vector<Vec2> dense_pts_;  // for winding tests and seeding
    int dense_m_ = 0;
    double dense_spacing_ = 0.0;
};

/// r-derivatives at r = 0 of the chart coefficient fields, as functions of
/// the curve alone (no closest-point table needed).
Vec2 d_dr_grad_S_of(const ClosedCurve& curve, double s);
double d_dr_grad_S_norm_sq_of(const ClosedCurve& curve, double s);
double d_dr_laplacian_S_of(const ClosedCurve& curve, double s);

/// Surface differential operators for functions h(s) on the curve: the full
/// operators at (r,s), their restrictions to r = 0, and the differences that
/// vanish on the curve. Time derivatives take the parametrization drift
/// dS/dt as an input (it comes from consecutive curves of a trajectory).
class SurfaceOperatorSet {
  public:
    explicit SurfaceOperatorSet(const TubularChart& chart) : chart_(&chart) {}

    // full operators at (r,s); h given by samples -> spectral internally
    Vec2 grad_full(const std::vector<fourier::cd>& h_coef, double r, double s) const;
    double lap_full(const std::vector<fourier::cd>& h_coef, double r, double s) const;

    // restrictions at r = 0
    Vec2 grad_restricted(const std::vector<fourier::cd>& h_coef, double s) const;
    double lap_restricted(const std::vector<fourier::cd>& h_coef, double s) const;

    // differences L = full - restricted
    Vec2 grad_difference(const std::vector<fourier::cd>& h_coef, double r, double s) const;
    double lap_difference(const std::vector<fourier::cd>& h_coef, double r, double s) const;

    // d/dr at r = 0 of the differences (the restrictions are r-independent)
    Vec2 d_dr_grad_difference(const std::vector<fourier::cd>& h_coef, double s) const;
    double d_dr_lap_difference(const std::vector<fourier::cd>& h_coef, double s) const;

  private:
    const TubularChart* chart_;
};

}  // namespace acstokes
