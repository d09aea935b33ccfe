#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

namespace acstokes {

/// Smooth even double-well with minima at +-1. Default: f(s) = (1-s^2)^2 / 8,
/// for which the standing wave is tanh(rho/2) and the decay rate is 1.
struct DoubleWell {
    std::function<double(double)> f, df, ddf, dddf;

    static DoubleWell quartic();

    /// min(sqrt(f''(-1)), sqrt(f''(1)))
    double decay_rate() const;
    /// Sampled invariant checks; throws NotADoubleWell on failure.
    void validate() const;
};

/// Tabulated standing-wave profile connecting the wells, with its first two
/// derivatives, the blending function eta, the surface tension sigma and the
/// decay rate alpha. Grid is uniform on [-L, L].
struct OptimalProfile {
    DoubleWell well;
    double L = 40.0;
    int n = 4096;  // grid points (odd internally so rho = 0 is a node)
    std::vector<double> rho;
    std::vector<double> theta, dtheta, ddtheta;
    std::vector<double> eta;
    double sigma = 0.0;
    double alpha = 1.0;
    bool closed_form = false;  // default quartic well uses tanh directly

    double spacing() const { return rho[1] - rho[0]; }
    int index_of_zero() const { return (static_cast<int>(rho.size()) - 1) / 2; }

    // linear interpolation of the tabulations (clamped to +-1 / 0 outside)
    double theta_at(double r) const;
    double dtheta_at(double r) const;
    double ddtheta_at(double r) const;
    double eta_at(double r) const;

    /// trapezoid quadrature against the grid weight
    double integrate(const std::vector<double>& values) const;

    /// CSV export: rho, theta, dtheta, ddtheta, eta
    void write_csv(std::ostream& os) const;
};

/// Solve -theta'' + f'(theta) = 0, theta(0) = 0, theta(+-inf) = +-1 and
/// tabulate everything on [-L, L]. The default well takes the closed form;
/// general wells go through the first-integral quadrature.
OptimalProfile optimal_profile(const DoubleWell& well, double L = 40.0, int n = 4096);

/// Bounded solution of -u'' + f''(theta0) u = g with u(0) = 0 (the linearized
/// operator about the profile). Requires the compatibility condition
/// integral(g theta0') = 0 up to tolerance, else throws IncompatibleRHS with
/// the integral value. g and the result live on the profile grid.
std::vector<double> solve_linearized(const std::vector<double>& g, const OptimalProfile& profile,
                                     double tol_compat_rel = 1e-9);

struct EigenPair {
    double value;
    std::vector<double> vector;  // normalized, on the profile grid
};

/// k smallest eigenpairs of the discretized linearized operator (k <= 10),
/// shift-invert Lanczos with Richardson-extrapolated eigenvalues.
std::vector<EigenPair> spectrum_L(const OptimalProfile& profile, int k);

/// Per-s slices of the second-order inner correction: solves
/// L c2 = |grad_G h1|^2 theta0'' - rho theta0' (kappa1 - div_tau v) for each s.
/// Returns c2[s][rho] with c2(0,s) = 0. Inputs are sampled on a common s-grid.
std::vector<std::vector<double>> c2_hat(const std::vector<double>& grad_h1_sq,
                                        const std::vector<double>& kappa1,
                                        const std::vector<double>& div_tau_v,
                                        const OptimalProfile& profile);

}  // namespace acstokes
