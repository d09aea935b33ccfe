#pragma once

#include "acstokes/chart.hpp"
#include "acstokes/profile.hpp"
#include "acstokes/stokes.hpp"

namespace acstokes {

/// Smooth cutoff: 1 for |s| <= delta, 0 for |s| >= 2 delta.
double cutoff(double s, double delta);
double cutoff_derivative(double s, double delta);

struct DiffuseOptions {
    double eps = 0.08;
    int grid_n = 0;        // 0: smallest power-of-two-ish n with h <= eps/4
    double dt = 0.0;       // 0: min(0.1 eps^2, c_stab eps^2)
    double t_final = 0.02;
    BoundaryMode bc = BoundaryMode::Periodic;
    double delta = 0.1;    // tube half width of the initial chart
    int output_every = 0;  // snapshot cadence in steps (0: final only)
    double c_stab = 0.1;   // explicit-part stability factor, dt <= c_stab eps^2
    bool disable_flow = false;  // force v = 0 (test hook)
    double max_growth = 0.1;    // allowed excess over max(|c0|,1)
};

struct EnergyRecord {
    double time = 0.0;
    double energy = 0.0;       // E_eps(c)
    double dissipated = 0.0;   // integral of |grad v|^2 + mu^2/eps up to time
    double max_abs_c = 0.0;
};

struct DiffuseState {
    PhaseField c;
    VelocityField vel;
    double eps = 0.0;
    double time = 0.0;
    double initial_sup = 1.0;  // max(|c0|_inf, 1)
    std::vector<EnergyRecord> ledger;
    // multistep history (empty before the first step)
    PhaseField prev_c;
    std::vector<double> prev_explicit;
    bool has_history = false;
};

/// Phase value of the glued initial profile at a point.
double diffuse_phase_value(const TubularChart& chart, const OptimalProfile& profile, double eps,
                           double delta, Vec2 x);

/// Well-prepared initial data zeta(d) theta0(d/eps) + (1 - zeta(d)) sign(d).
/// Throws ResolutionError when the grid does not resolve the layer (h > eps/4).
PhaseField init_phase(const TubularChart& chart, double eps, const OptimalProfile& profile,
                      const Grid2D& grid, BoundaryMode bc, double delta);

/// Chemical potential -eps lap c + f'(c)/eps with the 5-point stencil.
PhaseField chemical_potential(const PhaseField& c, double eps, const DoubleWell& well);

/// Ginzburg-Landau energy h^2 sum (eps |grad c|^2 / 2 + f(c)/eps).
double phase_energy(const PhaseField& c, double eps, const DoubleWell& well);

/// One coupled step: quasi-static Stokes with the capillary force, then the
/// semi-implicit Allen-Cahn update with upwind-biased advection. The
/// diffusion and the linear splitting term are implicit, everything else
/// explicit; with step history available the combination is the two-step
/// backward-differentiation variant (second order in dt).
DiffuseState step(const DiffuseState& state, double dt, const DiffuseOptions& opts,
                  const OptimalProfile& profile);

struct DiffuseRun {
    std::vector<double> snapshot_times;
    std::vector<PhaseField> snapshots;
    std::vector<VelocityField> velocity_snapshots;
    DiffuseState final_state;
    std::vector<EnergyRecord> ledger;
    double grid_h = 0.0;
    double dt = 0.0;
};

DiffuseRun run_diffuse(const ClosedCurve& curve0, const DiffuseOptions& opts,
                       const OptimalProfile& profile);

/// Zero-level-set extraction by sign changes along grid lines.
std::vector<Vec2> zero_level_points(const PhaseField& c);

/// Algebraic least-squares circle through the points.
struct CircleFit {
    Vec2 center{0.0, 0.0};
    double radius = 0.0;
};
CircleFit fit_circle(const std::vector<Vec2>& pts);

}  // namespace acstokes
