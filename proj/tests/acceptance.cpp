// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria run on the default shrinking-circle study unless stated.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "acstokes/harness.hpp"

using namespace acstokes;

namespace {

int g_failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    if (!pass) ++g_failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

const OptimalProfile& profile() {
    static OptimalProfile P = optimal_profile(DoubleWell::quartic());
    return P;
}

void criterion1_profile() {
    Timer timer;
    const auto& P = profile();
    double dev = 0.0;
    for (size_t i = 0; i < P.rho.size(); ++i)
        dev = std::max(dev, std::abs(P.theta[i] - std::tanh(0.5 * P.rho[i])));
    const double h = P.spacing();
    double res = 0.0;
    for (size_t i = 3; i + 3 < P.rho.size(); ++i) {
        const double dd = (2.0 * P.theta[i - 3] - 27.0 * P.theta[i - 2] + 270.0 * P.theta[i - 1] -
                           490.0 * P.theta[i] + 270.0 * P.theta[i + 1] - 27.0 * P.theta[i + 2] +
                           2.0 * P.theta[i + 3]) /
                          (180.0 * h * h);
        res = std::max(res, std::abs(-dd + P.well.df(P.theta[i])));
    }
    const double sig_err = std::abs(P.sigma - 2.0 / 3.0);
    const double t = timer.seconds();
    report(1, "profile exactness",
           dev <= 1e-10 && res <= 1e-8 && sig_err <= 1e-8 && t < 1.0,
           "max dev " + fmt(dev) + ", residual " + fmt(res) + ", |sigma-2/3| " + fmt(sig_err) +
               ", " + fmt(t) + " s");
}

void criterion2_linearized() {
    Timer timer;
    const auto& P = profile();
    auto u = solve_linearized(P.ddtheta, P);
    double err = 0.0;
    for (size_t i = 0; i < P.rho.size(); ++i)
        err = std::max(err, std::abs(u[i] + 0.5 * P.rho[i] * P.dtheta[i]));
    auto pairs = spectrum_L(P, 2);
    double num = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < P.rho.size(); ++i) {
        num += pairs[0].vector[i] * P.dtheta[i];
        na += pairs[0].vector[i] * pairs[0].vector[i];
        nb += P.dtheta[i] * P.dtheta[i];
    }
    const double align = std::abs(num) / std::sqrt(na * nb);
    const double t = timer.seconds();
    report(2, "linearized-operator identity",
           err <= 1e-6 && std::abs(pairs[0].value) <= 1e-6 && align >= 1.0 - 1e-6 && t < 5.0,
           "identity err " + fmt(err) + ", |lambda1| " + fmt(std::abs(pairs[0].value)) +
               ", alignment 1-" + fmt(1.0 - align) + ", " + fmt(t) + " s");
}

void criterion3_sharp() {
    Timer timer;
    SharpOptions opts;
    opts.sigma = 0.0;
    opts.dt = 1e-4;
    opts.t_final = 0.2;
    auto traj = run_sharp(ClosedCurve::circle({0.0, 0.0}, 1.0, 0.0, 128), opts);
    auto radius = [](const ClosedCurve& c) {
        auto pts = c.sample(4 * c.n_modes());
        Vec2 ctr = c.centroid_of_samples();
        double acc = 0.0;
        for (auto& p : pts) acc += norm(p - ctr);
        return acc / pts.size();
    };
    const double r_err = std::abs(radius(traj.curves.back()) - std::sqrt(1.0 - 0.4));

    auto t_err = [&](double dt) {
        SharpOptions o = opts;
        o.dt = dt;
        o.t_final = 0.1;
        o.respace = false;
        auto t = run_sharp(ClosedCurve::circle({0.0, 0.0}, 1.0, 0.0, 64), o);
        return std::abs(radius(t.curves.back()) - std::sqrt(1.0 - 0.2));
    };
    const double t_order = std::log2(t_err(5e-4) / t_err(2.5e-4));

    auto mode_run = [&](int modes) {
        SharpOptions o = opts;
        o.dt = 2e-5;
        o.t_final = 0.01;
        return run_sharp(ClosedCurve::ellipse({0.0, 0.0}, 0.4, 0.25, 0.0, modes), o);
    };
    auto ref = mode_run(64);
    auto hausdorff = [&](const ClosedCurve& a, const ClosedCurve& b) {
        auto pa = a.sample(256), pb = b.sample(8192);
        double worst = 0.0;
        for (auto& p : pa) {
            double best = 1e300;
            for (auto& q : pb) best = std::min(best, norm(p - q));
            worst = std::max(worst, best);
        }
        return worst;
    };
    const double e12 = hausdorff(mode_run(12).curves.back(), ref.curves.back());
    const double e24 = hausdorff(mode_run(24).curves.back(), ref.curves.back());
    const double s_order = std::log2(e12 / e24);
    const double t = timer.seconds();
    report(3, "sharp-interface oracle",
           r_err <= 1e-3 && t_order >= 1.9 && s_order >= 1.9 && t < 30.0,
           "radius err " + fmt(r_err) + ", temporal order " + fmt(t_order) + ", spatial order " +
               fmt(s_order) + ", " + fmt(t) + " s");
}

void criterion4_traction() {
    Timer timer;
    Grid2D grid{256};
    const double R = 0.3, sigma = profile().sigma;
    auto curve = ClosedCurve::circle({0.5, 0.5}, R);
    const int mq = ib_quadrature_count(grid, curve);
    auto vel = traction_solve(grid, curve, capillary_traction(curve, mq, sigma),
                              BoundaryMode::Periodic);
    auto traces = extract_traces(curve, &vel, 64, sigma);
    double jump_dev = 0.0;
    const double target = -sigma / R;
    for (double pj : traces.pressure_jump)
        jump_dev = std::max(jump_dev, std::abs(pj - target) / std::abs(target));
    const double vmax = vel.max_norm();
    const double t = timer.seconds();
    report(4, "two-phase traction jump",
           jump_dev <= 0.05 && vmax <= 5e-3 * sigma / R && t < 60.0,
           "jump dev " + fmt(jump_dev * 100) + "%, |v| " + fmt(vmax) + " vs " +
               fmt(5e-3 * sigma / R) + ", " + fmt(t) + " s");
}

void criteria_567_study() {
    Timer timer;
    Config cfg;  // the default shrinking-circle study
    auto report_data = run_converge(cfg, "");
    const double t_total = timer.seconds();
    const double per_eps = t_total / cfg.eps_ladder.size();

    bool energy_ok = true, maxc_ok = true;
    for (const auto& row : report_data.rows) {
        if (!(row.energy_end <= row.energy_start * (1.0 + 1e-6))) energy_ok = false;
        if (!(row.max_abs_c <= 1.0 + 1e-6)) maxc_ok = false;
    }
    report(5, "diffuse-solver structure",
           energy_ok && maxc_ok && per_eps < 300.0,
           std::string("energy one-sided ") + (energy_ok ? "ok" : "violated") + ", max|c| " +
               (maxc_ok ? "ok" : "violated") + ", " + fmt(per_eps) + " s/eps");

    bool radius_mono = true, comp_mono = true, vel_mono = true;
    for (size_t i = 1; i < report_data.rows.size(); ++i) {
        // the ladder runs from the largest eps down
        if (report_data.rows[i].radius_error > report_data.rows[i - 1].radius_error)
            radius_mono = false;
        if (report_data.rows[i].composite() > report_data.rows[i - 1].composite())
            comp_mono = false;
        if (report_data.rows[i].velocity_error > report_data.rows[i - 1].velocity_error)
            vel_mono = false;
    }
    const double r_ord = report_data.radius_fit.order;
    const double c_ord = report_data.composite_fit.order;
    report(6, "interface convergence",
           radius_mono && comp_mono && r_ord >= 1.0 && c_ord >= 1.0,
           "radius order " + fmt(r_ord) + (radius_mono ? " (monotone)" : " (NOT monotone)") +
               ", composite order " + fmt(c_ord) + (comp_mono ? " (monotone)" : " (NOT monotone)") +
               ", stretch target 1.5 recorded: " + (c_ord >= 1.5 ? "met" : "not met"));

    report(7, "velocity error trend", vel_mono,
           std::string("L2(0,T;L1.5) errors ") + (vel_mono ? "decrease" : "do NOT decrease") +
               " along the ladder, order " + fmt(report_data.velocity_fit.order));
}

void criterion8_spectral() {
    Timer timer;
    const auto& P = profile();
    auto curve = ClosedCurve::circle({0.5, 0.5}, 0.35);
    TubularChart chart(curve, 0.0);
    // calibrated once on this configuration and frozen
    const double C0 = 8.0;
    bool bounded = true;
    std::string detail;
    for (double eps : {0.1, 0.05, 0.025}) {
        int n = 32;
        while (1.0 / n > eps / 4.0) n *= 2;
        Grid2D grid{n};
        auto cA = init_phase(chart, eps, P, grid, BoundaryMode::Periodic, chart.delta());
        auto lam = smallest_eigenvalues(cA, eps, P.well, 3);
        if (!(lam[0] >= -C0)) bounded = false;
        detail += fmt(lam[0]) + " ";
    }
    // constant-phase control: lambda_min ~ eps^-2 f''(1) > 0
    bool control_ok = true;
    {
        const double eps = 0.1;
        Grid2D grid{64};
        PhaseField ones(grid, BoundaryMode::Periodic, 1.0);
        auto lam = smallest_eigenvalues(ones, eps, P.well, 1);
        const double expect = P.well.ddf(1.0) / (eps * eps);
        if (std::abs(lam[0] - expect) > 0.01 * expect) control_ok = false;
        detail += "| control " + fmt(lam[0]) + " vs " + fmt(expect);
    }
    const double t = timer.seconds();
    report(8, "spectral lower bound", bounded && control_ok && t < 120.0,
           "lambda_min {" + detail + "} >= -" + fmt(C0) + ", " + fmt(t) + " s");
}

void criterion9_determinism() {
    Config cfg;
    cfg.eps_ladder = {0.08, 0.06};
    cfg.t_final = 2e-3;
    cfg.modes = 64;
    cfg.sharp_grid_n = 128;
    auto r1 = run_converge(cfg, "");
    auto r2 = run_converge(cfg, "");
    std::stringstream a, b;
    write_report_csv(a, r1);
    write_report_csv(b, r2);
    report(9, "determinism", a.str() == b.str() && !a.str().empty(),
           a.str() == b.str() ? "reruns byte-identical" : "outputs differ");
}

}  // namespace

int main() {
    criterion1_profile();
    criterion2_linearized();
    criterion3_sharp();
    criterion4_traction();
    criteria_567_study();
    criterion8_spectral();
    criterion9_determinism();
    std::printf("%s\n", g_failures == 0 ? "ALL CRITERIA PASSED" : "CRITERIA FAILED");
    return g_failures == 0 ? 0 : 1;
}
