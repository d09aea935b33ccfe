#pragma once

#include <functional>
#include <vector>

#include "acstokes/curve.hpp"
#include "acstokes/profile.hpp"
#include "acstokes/surface_field.hpp"

namespace acstokes {

/// Metric data of the evolving curve restricted to r = 0, sampled on the
/// uniform s-grid, plus the parametrization drift dS/dt on the curve.
struct SurfaceMetricSample {
    std::vector<double> grad_S_sq;  // |grad S|^2 = 1/|dX0/ds|^2
    std::vector<double> lap_S;      // Laplacian of S
    std::vector<Vec2> grad_S;       // tangential vector tau/|dX0/ds|
    std::vector<double> dSdt;       // parametrization drift on the curve
};

SurfaceMetricSample metric_of_curve(const ClosedCurve& curve, int n_samples);

/// Linear parabolic problem on the evolving curve,
///   D_t h + w . grad_G h - lap_G h + a h = g,
/// with time-sampled coefficients. Samplers may be null (treated as zero).
struct SurfaceParabolicProblem {
    std::function<SurfaceMetricSample(double t)> metric;
    std::function<std::vector<Vec2>(double t)> drift;       // w(s,t)
    std::function<std::vector<double>(double t)> reaction;  // a(s,t)
    std::function<std::vector<double>(double t)> source;    // g(s,t)
    double growth_bound = 10.0;  // per-step explicit growth guard
};

/// One step of the exponential IMEX scheme: the constant-coefficient part of
/// lap_G advances by its exact Fourier symbol, everything else explicitly
/// (two-stage, second order in dt).
SurfaceField advance_surface_heat(const SurfaceField& h, const SurfaceParabolicProblem& problem,
                                  double dt);

struct SharpTrajectory;  // sharp.hpp

/// Per-step coupling that produces the normal-velocity source X0*(v1.n)(s)
/// for the interface-correction equation, given the current correction field.
using TractionResponse =
    std::function<std::vector<double>(const SurfaceField& h1, int step_index)>;

/// March the first interface correction h1 over the trajectory time ladder:
///   D_t h1 - X0*(v).grad_G h1 - lap_G h1 - kappa1 h1 + X0*(div_tau v) h1 = X0*(v1.n),
/// h1(0) = 0, with the right side produced by the injected Stokes coupling.
std::vector<SurfaceField> solve_h1(const SharpTrajectory& traj, const TractionResponse& coupling);

/// March the second correction h2 with source B - kappa2 h1^2 + X0*(n.w1).
/// The w1 source defaults to zero when the ladder is empty.
std::vector<SurfaceField> solve_h2(const SharpTrajectory& traj,
                                   const std::vector<SurfaceField>& h1,
                                   const std::vector<SurfaceField>& frakB,
                                   const std::vector<SurfaceField>& kappa2,
                                   const std::vector<SurfaceField>& w1_source = {});

/// Tensor-grid field c(rho, s) marched by eps^2 (D_t - lap_G) c + L c = rhs
/// with the rho-operator implicit (banded solve per s-mode) and per-step
/// projection onto the complement of theta0'.
struct InnerLayerField {
    std::vector<double> rho;                 // uniform rho-grid
    std::vector<std::vector<double>> data;   // data[i_rho][i_s]
    double time_tag = 0.0;
    int n_s() const { return data.empty() ? 0 : static_cast<int>(data[0].size()); }
    int n_rho() const { return static_cast<int>(data.size()); }
};

using InnerRhs = std::function<double(double rho, double s, double t)>;

struct SolveC3Options {
    int n_rho = 2048;          // rho intervals (grid has n_rho+1 nodes)
    double rho_max = 40.0;
    double compat_tol = 1e-8;  // pre-projection mass guard (CompatibilityDrift)
    double drift_factor = 50.0;
    int store_every = 1;       // ladder thinning (the final step is always kept)
};

std::vector<InnerLayerField> solve_c3(const SharpTrajectory& traj, const InnerRhs& rhs, double eps,
                                      const OptimalProfile& profile,
                                      const SolveC3Options& opts = {});

/// Ladder export: CSV with columns (t, s, value).
void write_ladder_csv(std::ostream& os, const std::vector<SurfaceField>& ladder);

}  // namespace acstokes
