#pragma once

#include "acstokes/chart.hpp"
#include "acstokes/grid.hpp"
#include "acstokes/surface_field.hpp"

namespace acstokes {

struct StokesReport {
    Vec2 removed_mean{0.0, 0.0};  // mean force dropped in the periodic solve
    int iterations = 0;
    double residual = 0.0;
};

/// Solve -lap v + grad p = f, div v = 0 on the unit box. Periodic boundaries
/// go through the exact staggered Fourier projection; Dirichlet (no-slip)
/// runs CG on the pressure Schur complement with fast sine-transform
/// component solves. A nonzero mean force in the periodic case is removed
/// and reported (it has no divergence-free response).
VelocityField stokes_solve(const Grid2D& grid, const FaceField& force, BoundaryMode bc,
                           StokesReport* report = nullptr);

/// Face divergence of a symmetric cell-centered tensor, times scale.
FaceField tensor_face_divergence(const Grid2D& grid, BoundaryMode bc,
                                 const std::vector<double>& Txx, const std::vector<double>& Txy,
                                 const std::vector<double>& Tyy, double scale);

/// Face-averaged centered discretization of -eps div(grad c (x) grad c).
FaceField capillary_force(const PhaseField& c, double eps);

/// Vector traction density along the curve (force per unit arclength),
/// sampled at s_j = j/n.
struct TractionDensity {
    std::vector<Vec2> samples;
};

/// Traction density of the sharp interface model, -sigma H n.
TractionDensity capillary_traction(const ClosedCurve& curve, int n_samples, double sigma);

/// Marker count giving spacing of at most h/2 along the curve.
int ib_quadrature_count(const Grid2D& grid, const ClosedCurve& curve);

/// Spread a curve traction onto the staggered grid with the 4-point
/// regularized delta, arclength-weighted.
FaceField spread_traction(const Grid2D& grid, const ClosedCurve& curve,
                          const TractionDensity& traction, BoundaryMode bc);

/// Adjoint interpolation of the staggered velocity to curve points.
std::vector<Vec2> interface_trace(const VelocityField& vel, const ClosedCurve& curve,
                                  int n_samples);

/// Regularized two-phase solve: spread the traction, then stokes_solve.
/// Throws ClearanceViolation if the 3*delta tube touches the box boundary
/// in Dirichlet mode.
VelocityField traction_solve(const Grid2D& grid, const ClosedCurve& curve,
                             const TractionDensity& traction, BoundaryMode bc,
                             StokesReport* report = nullptr);

/// 4-point immersed-boundary kernel (support |r| < 2).
double ib_kernel(double r);

/// One-sided linear extrapolation of a sampled profile to the interface:
/// fits value + slope over the probe offsets and returns both at r = 0.
struct OneSidedFit {
    double value = 0.0;
    double slope = 0.0;
    double curvature = 0.0;
};
OneSidedFit one_sided_fit(const std::vector<double>& offsets, const std::vector<double>& values);

}  // namespace acstokes
