#pragma once

#include <memory>

#include "acstokes/diffuse.hpp"
#include "acstokes/sharp.hpp"
#include "acstokes/surface_pde.hpp"

namespace acstokes {

/// Decaying blending integrals of the profile, cumulative from -infinity on
/// the profile grid: I0 = int eta', I1 = int z eta', I2 = int z^2 eta',
/// J2 = double integral of (z^2 eta'' + 4 z eta'), and the a1 kernels.
struct ProfileBlending {
    const OptimalProfile* profile = nullptr;
    std::vector<double> I0, I1, I2, J2;
    std::vector<double> rho_etapp;  // cumulative of z eta''
    std::vector<double> rho_etap;   // cumulative of z eta'
    double I1_inf = 0.0, I2_inf = 0.0;

    explicit ProfileBlending(const OptimalProfile& P);
    double at(const std::vector<double>& table, double rho) const;
};

/// Interface traces of the first velocity correction, recorded per ladder
/// step while the interface-correction equation is marched.
struct V1StepData {
    std::vector<Vec2> v1_trace;
    std::vector<double> v1_normal;  // n . v1 (the h1 source)
    std::vector<double> div_tau_v1;
    std::vector<Vec2> dn_v1_plus, dn_v1_minus;
    std::vector<double> p1_jump;
};

struct CouplingOptions {
    int grid_n = 256;
    BoundaryMode bc = BoundaryMode::Periodic;
    int field_every = 0;  // keep the v1 grid field every k steps (0: none)
};

/// Production Stokes coupling for the h1 equation: assembles the traction
/// 2 h1 (n p_hat0 - 2 dn_vhat0) - sigma (lap_G h1) n, solves the regularized
/// two-phase problem and records the v1 traces.
class H1Coupling {
  public:
    H1Coupling(const SharpTrajectory& traj, const OptimalProfile& profile, CouplingOptions opts);

    std::vector<double> operator()(const SurfaceField& h1, int step);

    const std::vector<V1StepData>& data() const { return data_; }
    const std::vector<int>& field_steps() const { return field_steps_; }
    const std::vector<VelocityField>& fields() const { return fields_; }
    TractionResponse response();  // wraps *this; keep the coupling alive

  private:
    const SharpTrajectory* traj_;
    const OptimalProfile* profile_;
    CouplingOptions opts_;
    std::vector<V1StepData> data_;
    std::vector<int> field_steps_;
    std::vector<VelocityField> fields_;
};

/// Modulation data of the inner expansion: curvature moments, the quadratic
/// trace polynomial b, the geometric correction D = Ad theta0'' + Bd theta0',
/// and the solvability coefficient B.
struct ModulationLadder {
    std::vector<SurfaceField> kappa1, kappa2, frakB;
    struct BData {
        std::vector<double> a2sum, a2diff;  // one-sided second normal derivatives of v.n
        std::vector<double> a1sum_dot, a1diff_dot;  // (dn v0+ +- dn v0-) . grad_G h1
        std::vector<double> v1_gradh1, divv1_h1;
        std::vector<double> tv2_coef;  // -[dnn v.n]/4 (the inner v2 normal part)
        std::vector<double> h1;
    };
    std::vector<BData> b;
    std::vector<std::vector<double>> Ad, Bd;  // D coefficients per step, s-sampled

    double eval_b(const ProfileBlending& blend, int step, int j, double rho) const;
    double eval_D(const OptimalProfile& P, int step, int j, double rho) const;
};

ModulationLadder modulation_coefficients(const SharpTrajectory& traj,
                                         const std::vector<SurfaceField>& h1,
                                         const std::vector<V1StepData>& v1,
                                         const OptimalProfile& profile,
                                         const ProfileBlending& blend);

/// Right side of the third-order inner equation,
///   2 grad_G h1 . grad_G h2 theta0'' - (b - B - kappa2 (rho^2 + 2 rho h1)) theta0'
///   - (rho + h1) D,
/// bound to the ladder data for use with solve_c3.
InnerRhs c3_right_side(const SharpTrajectory& traj, const ModulationLadder& mod,
                       const std::vector<SurfaceField>& h1, const std::vector<SurfaceField>& h2,
                       const OptimalProfile& profile, const ProfileBlending& blend);

/// Everything the approximate-solution builders need at one time level.
struct ExpansionBundle {
    const SharpTrajectory* traj = nullptr;
    const OptimalProfile* profile = nullptr;
    std::shared_ptr<ProfileBlending> blend;
    std::vector<SurfaceField> h1, h2;
    std::vector<V1StepData> v1;
    std::vector<int> v1_field_steps;
    std::vector<VelocityField> v1_fields;
    ModulationLadder mod;
    std::vector<InnerLayerField> c3;  // thinned ladder (see options)
    std::vector<int> c3_steps;

    int step_of_time(double t) const;
    const InnerLayerField* c3_at_step(int step) const;
    const VelocityField* v1_field_at_step(int step) const;
};

struct ExpansionOptions {
    CouplingOptions coupling;
    bool with_h2 = true;
    std::vector<SurfaceField> w1_source;  // optional n.w1 ladder for h2
};

/// Solve the whole modulation hierarchy over a sharp trajectory.
ExpansionBundle build_expansion(const SharpTrajectory& traj, const OptimalProfile& profile,
                                const ExpansionOptions& opts);

/// March the third-order layer for a concrete eps and store the thinned
/// ladder in the bundle (the layer equation is eps-dependent).
void attach_c3(ExpansionBundle& bundle, double eps, const SolveC3Options& opts = {});

/// Glued approximate phase field at the given ladder step.
/// order: 0 (profile only), 2 (+eps^2 c2), 3 (+eps^3 c3).
PhaseField build_cA(const ExpansionBundle& bundle, int step, double eps, int order,
                    const Grid2D& grid, BoundaryMode bc, double delta);

struct ApproxVelocity {
    VelocityField v;
    PhaseField p_minus1, p0, p1;  // inner pressure pieces (diagnostics)
    double seam_mismatch = 0.0;   // max |inner - outer| over the blend region
};

/// Glued approximate velocity at a ladder step with a stored v0 snapshot.
/// order: 0 (sharp velocity), 1 (+eps v1), 2 (+eps^2 v2).
ApproxVelocity build_vA(const ExpansionBundle& bundle, int step, double eps, int order,
                        const Grid2D& grid, BoundaryMode bc, double delta,
                        double seam_tolerance = 0.0);

}  // namespace acstokes
