#pragma once

#include <iosfwd>
#include <string>

#include "acstokes/asymptotics.hpp"

namespace acstokes {

/// Study configuration, readable from key=value text (one pair per line,
/// '#' comments). Unspecified keys keep the defaults of the standard
/// shrinking-circle study.
struct Config {
    std::vector<double> eps_ladder{0.08, 0.06, 0.04, 0.03};
    double epsilon = 0.08;  // single-run commands
    int grid_n = 0;         // 0: chosen so h <= eps/4
    double dt = 0.0;        // 0: min(0.1 eps^2, stability bound)
    double t_final = 0.02;
    BoundaryMode bc = BoundaryMode::Periodic;
    double delta = 0.1;
    int output_every = 0;   // 0: about five snapshots
    std::string seed_curve = "circle:0.5,0.5,0.3";
    int modes = 128;
    int sharp_grid_n = 256;
    int order_c = 2;
    int order_v = 1;
    double q = 1.5;

    static Config from_stream(std::istream& is);
    static Config from_file(const std::string& path);
    void write(std::ostream& os) const;
};

/// "circle:cx,cy,R", "ellipse:cx,cy,a,b", or "file:<path>".
ClosedCurve make_seed_curve(const std::string& spec, int modes);

/// Error norms of one snapshot pair against the approximate solution.
struct SnapshotNorms {
    double c_l2 = 0.0;          // L2(Omega) of c_eps - c_A
    double grad_ext_sq = 0.0;   // |grad|^2 outside the delta-tube
    double grad_tau_sq = 0.0;   // tangential part inside the 2 delta-tube
    double grad_n_sq = 0.0;     // normal part inside the 2 delta-tube
    double grad_tube_sq = 0.0;  // full gradient inside the 2 delta-tube
    double v_lq = 0.0;          // Lq(Omega) of v_eps - v_A
};

SnapshotNorms error_norms(const PhaseField& c_eps, const PhaseField& c_A,
                          const VelocityField& v_eps, const VelocityField& v_A,
                          const TubularChart& chart, double delta, double q);

/// Leading velocity-error diagnostic: the Stokes response to the mixed
/// capillary defect built from u1 = c_eps - c_A0. Returns the field and its
/// interface trace.
struct W1Diagnostic {
    VelocityField w1;
    std::vector<Vec2> trace;
    std::vector<double> normal_trace;
    double h1_norm_sq = 0.0;  // grad-norm of the response (boundedness record)
};
W1Diagnostic w1_diagnostic(const PhaseField& c_eps, const PhaseField& c_A0,
                           const SurfaceField& h2, double eps, const TubularChart& chart,
                           const OptimalProfile& profile);

/// k smallest eigenvalues of -lap + eps^-2 f''(c_A) on the grid of c_A,
/// shift-invert Lanczos with a sparse factorization.
std::vector<double> smallest_eigenvalues(const PhaseField& c_A, double eps,
                                         const DoubleWell& well, int k);

struct RateFit {
    double order = 0.0;
    double intercept = 0.0;  // log-log intercept
    double residual = 0.0;
};
/// Least-squares fit of log(error) against log(eps).
RateFit rate_fit(const std::vector<std::pair<double, double>>& rows);

struct LadderRow {
    double eps = 0.0;
    int grid_n = 0;
    double dt = 0.0;
    double sup_c_l2 = 0.0;
    double grad_exterior = 0.0;
    double grad_tangential = 0.0;
    double grad_normal_weighted = 0.0;
    double velocity_error = 0.0;  // L2(0,T; Lq)
    double radius_error = 0.0;    // sup_t zero-level radius error vs sharp
    double energy_start = 0.0, energy_end = 0.0;
    double max_abs_c = 0.0;
    double composite() const {
        return sup_c_l2 + grad_exterior + grad_tangential + grad_normal_weighted;
    }
};

struct ConvergeReport {
    std::vector<LadderRow> rows;
    RateFit composite_fit, radius_fit, velocity_fit;
    bool fits_valid = false;  // false for degenerate ladders (warning emitted)
};

/// Run the full ladder study; CSV and plot series land in out_dir when it is
/// non-empty. Deterministic for a fixed config.
ConvergeReport run_converge(const Config& config, const std::string& out_dir);

void write_report_csv(std::ostream& os, const ConvergeReport& report);

}  // namespace acstokes
