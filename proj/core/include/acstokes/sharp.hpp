#pragma once

#include <iosfwd>
#include <optional>

#include "acstokes/stokes.hpp"

namespace acstokes {

/// Interface data sampled at s_j = j/n_samples for one time level.
struct SharpTraces {
    std::vector<double> H;            // curvature
    std::vector<double> V;            // normal velocity n.v + H actually used
    std::vector<Vec2> v_interface;    // velocity on the curve
    std::vector<double> div_tau_v;    // tangential divergence of v on the curve
    std::vector<double> pressure_jump;  // [p] = p+ - p- across the curve
    std::vector<double> p_hat0;       // ([d_n p] - sigma H^2)/2, the curve limit
    std::vector<Vec2> v_plus, v_minus;              // one-sided extrapolated v
    std::vector<Vec2> dn_v_plus, dn_v_minus;        // one-sided d_n v
    std::vector<double> dnn_vn_plus, dnn_vn_minus;  // one-sided d_n^2 (v.n)
    std::vector<Vec2> dn_vhat0;       // [d_n^2 v]/4, the curve limit of d_n vhat0
};

struct SharpOptions {
    int grid_n = 256;
    BoundaryMode bc = BoundaryMode::Periodic;
    double sigma = 2.0 / 3.0;
    double dt = 1e-4;
    double t_final = 0.2;
    int n_samples = 0;       // trace sample count; 0 = curve mode count
    int output_every = 0;    // velocity snapshots every k steps (0: none kept)
    bool semi_implicit = false;
    bool respace = true;
    double curvature_bound = 200.0;
    double c_curv = 0.15;    // explicit step restriction dt <= c (min spacing)^2 / max|H|
};

struct SharpState {
    ClosedCurve curve;
    double time = 0.0;
};

/// Time ladder of the front-tracking run. Curves and interface traces are
/// stored at every step; full velocity fields only at snapshot times.
struct SharpTrajectory {
    std::vector<double> times;
    std::vector<ClosedCurve> curves;
    std::vector<SharpTraces> traces;
    std::vector<int> snapshot_steps;
    std::vector<VelocityField> snapshots;
    int n_samples = 0;
    SharpOptions options;

    int n_steps() const { return static_cast<int>(times.size()); }
    double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
    /// dX0/dt at the given step by ladder finite differences (includes any
    /// tangential drift the respacing introduced).
    std::vector<Vec2> parametrization_velocity(int step) const;
    /// dS/dt on the curve: -tau . dX0/dt / |dX0/ds|.
    std::vector<double> dSdt(int step) const;
};

/// Solve the two-phase problem for the current curve and extract all traces.
SharpTraces extract_traces(const ClosedCurve& curve, const VelocityField* vel, int n_samples,
                           double sigma);

/// Resample the markers to equal arclength and refit the modes. The shape is
/// unchanged up to the spectral refit of the new parametrization.
ClosedCurve respace_to_equal_arclength(const ClosedCurve& curve, double time_tag);

/// One combined-law step: traction solve, trace, move markers by
/// (n.v + H) n dt (two-stage), respace, refit.
SharpState step_sharp(const SharpState& state, double dt, const SharpOptions& opts);

/// March the combined law over [0, t_final] and collect the ladder. Ladder
/// intervals substep internally when the explicit curvature restriction
/// demands it, with the interface velocity frozen over the interval.
SharpTrajectory run_sharp(const ClosedCurve& initial, const SharpOptions& opts);

/// Trace CSV: s, H, V, v.n, v.tau, [p].
void write_traces_csv(std::ostream& os, const SharpTrajectory& traj, int step);

}  // namespace acstokes
