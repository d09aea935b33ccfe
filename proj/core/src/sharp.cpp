#include "acstokes/sharp.hpp"

#include <cmath>
#include <ostream>

#include "acstokes/errors.hpp"

namespace acstokes {

namespace {

// normal velocity trace n.v on the curve as a Fourier series in s
std::vector<fourier::cd> normal_velocity_series(const ClosedCurve& curve,
                                                const SharpOptions& opts) {
    if (opts.sigma == 0.0) return {};
    Grid2D grid{opts.grid_n};
    const int mq = ib_quadrature_count(grid, curve);
    VelocityField vel =
        traction_solve(grid, curve, capillary_traction(curve, mq, opts.sigma), opts.bc);
    const int n = curve.n_modes();
    auto vtrace = interface_trace(vel, curve, n);
    std::vector<double> vn(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) vn[j] = dot(curve.normal(static_cast<double>(j) / n), vtrace[j]);
    return fourier::forward(vn);
}

}  // namespace

ClosedCurve respace_to_equal_arclength(const ClosedCurve& curve, double time_tag) {
    const int n = curve.n_modes();
    const int fine = 16 * n;
    // cumulative arclength on the fine parameter grid
    std::vector<double> arc(static_cast<size_t>(fine) + 1, 0.0);
    auto gfine = curve.sample_geometry(fine);
    const std::vector<double>& speeds = gfine.speed;
    auto sp = [&](int j) { return speeds[(j % fine + fine) % fine]; };
    for (int j = 0; j < fine; ++j)  // fourth-order corrected trapezoid, periodic data
        arc[j + 1] =
            arc[j] + (-sp(j - 1) + 13.0 * sp(j) + 13.0 * sp(j + 1) - sp(j + 2)) / (24.0 * fine);
    const double total = arc[fine];
    std::vector<Vec2> pts(static_cast<size_t>(n));
    int seg = 0;
    for (int k = 0; k < n; ++k) {
        const double target = total * k / n;
        while (seg + 1 < fine && arc[seg + 1] < target) ++seg;
        const double span = arc[seg + 1] - arc[seg];
        const double f = span > 0 ? (target - arc[seg]) / span : 0.0;
        double s = (seg + f) / fine;
        // Newton refinement of the table inversion: A(s) = target
        for (int it = 0; it < 3; ++it) {
            const double base = static_cast<double>(seg) / fine;
            double A = arc[seg];
            {  // 5-point Gauss-Legendre for the local arclength increment
                static const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                             0.5384693101056831, 0.9061798459386640};
                static const double gw[5] = {0.2369268850561891, 0.4786286704993665,
                                             0.5688888888888889, 0.4786286704993665,
                                             0.2369268850561891};
                const double mid = 0.5 * (base + s), half = 0.5 * (s - base);
                double acc = 0.0;
                for (int q = 0; q < 5; ++q) acc += gw[q] * curve.speed(mid + half * gx[q]);
                A += acc * half;
            }
            s -= (A - target) / curve.speed(s);
        }
        pts[k] = curve.position(s);
    }
    return ClosedCurve::from_samples(pts, time_tag, n);
}

SharpTraces extract_traces(const ClosedCurve& curve, const VelocityField* vel, int n_samples,
                           double sigma) {
    SharpTraces T;
    const int m = n_samples;
    T.H.resize(m);
    T.V.resize(m);
    T.v_interface.assign(m, Vec2{0.0, 0.0});
    T.div_tau_v.assign(m, 0.0);
    T.pressure_jump.assign(m, 0.0);
    T.p_hat0.assign(m, 0.0);
    T.v_plus.assign(m, Vec2{0.0, 0.0});
    T.v_minus.assign(m, Vec2{0.0, 0.0});
    T.dn_v_plus.assign(m, Vec2{0.0, 0.0});
    T.dn_v_minus.assign(m, Vec2{0.0, 0.0});
    T.dnn_vn_plus.assign(m, 0.0);
    T.dnn_vn_minus.assign(m, 0.0);
    T.dn_vhat0.assign(m, Vec2{0.0, 0.0});

    for (int j = 0; j < m; ++j) T.H[j] = curve.curvature(static_cast<double>(j) / m);

    if (vel != nullptr) {
        T.v_interface = interface_trace(*vel, curve, m);
        // tangential divergence from the spectral derivative of the trace
        std::vector<double> vx(m), vy(m);
        for (int j = 0; j < m; ++j) {
            vx[j] = T.v_interface[j][0];
            vy[j] = T.v_interface[j][1];
        }
        auto dvx = fourier::derivative(fourier::forward(vx));
        auto dvy = fourier::derivative(fourier::forward(vy));
        for (int j = 0; j < m; ++j) {
            const double s = static_cast<double>(j) / m;
            Vec2 tau = curve.tangent(s);
            Vec2 dv{fourier::eval(dvx, s), fourier::eval(dvy, s)};
            T.div_tau_v[j] = dot(tau, dv) / curve.speed(s);
        }

        // one-sided probes clear of the smeared band of the regularized delta
        // (band halfwidth 2h, plus one cell for the bilinear sampling stencil)
        const double h = vel->grid().h();
        const std::vector<double> offs{3.5 * h, 4.5 * h, 5.5 * h, 6.5 * h, 7.5 * h};
        std::vector<double> po(offs.size());
        for (int j = 0; j < m; ++j) {
            const double s = static_cast<double>(j) / m;
            Vec2 x0 = curve.position(s);
            Vec2 n = curve.normal(s);
            OneSidedFit fits_p[2];
            OneSidedFit fits_u[2], fits_v[2], fits_vn[2];
            for (int side = 0; side < 2; ++side) {
                const double sgn = side == 0 ? 1.0 : -1.0;
                std::vector<double> rr(offs.size()), pu(offs.size()), pv(offs.size()),
                    pvn(offs.size());
                for (size_t k = 0; k < offs.size(); ++k) {
                    const double r = sgn * offs[k];
                    Vec2 x = x0 + r * n;
                    rr[k] = r;
                    po[k] = vel->sample_p(x);
                    Vec2 vv = vel->sample(x);
                    pu[k] = vv[0];
                    pv[k] = vv[1];
                    pvn[k] = dot(vv, n);
                }
                fits_p[side] = one_sided_fit(rr, po);
                fits_u[side] = one_sided_fit(rr, pu);
                fits_v[side] = one_sided_fit(rr, pv);
                fits_vn[side] = one_sided_fit(rr, pvn);
            }
            T.pressure_jump[j] = fits_p[0].value - fits_p[1].value;
            const double kappa1 = T.H[j] * T.H[j];
            T.p_hat0[j] = 0.5 * (fits_p[0].slope - fits_p[1].slope - sigma * kappa1);
            T.v_plus[j] = {fits_u[0].value, fits_v[0].value};
            T.v_minus[j] = {fits_u[1].value, fits_v[1].value};
            T.dn_v_plus[j] = {fits_u[0].slope, fits_v[0].slope};
            T.dn_v_minus[j] = {fits_u[1].slope, fits_v[1].slope};
            T.dnn_vn_plus[j] = fits_vn[0].curvature;
            T.dnn_vn_minus[j] = fits_vn[1].curvature;
            T.dn_vhat0[j] = 0.25 * Vec2{fits_u[0].curvature - fits_u[1].curvature,
                                        fits_v[0].curvature - fits_v[1].curvature};
        }
    } else {
        // no flow: the pressure jump of the sharp model would be sigma H
        for (int j = 0; j < m; ++j) T.p_hat0[j] = -0.5 * sigma * T.H[j] * T.H[j];
    }
    for (int j = 0; j < m; ++j) {
        const double s = static_cast<double>(j) / m;
        T.V[j] = dot(curve.normal(s), T.v_interface[j]) + T.H[j];
    }
    return T;
}

namespace {

// advance the curve over one ladder interval, substepping against the
// explicit curvature restriction; the interface velocity trace is frozen
// over the interval (it varies slowly compared to the curvature term)
ClosedCurve advance_curve(const ClosedCurve& c0, const std::vector<fourier::cd>& vn_coef,
                          double dt, const SharpOptions& opts, double t_new) {
    const int n = c0.n_modes();
    const double maxH = std::max(c0.max_abs_curvature(), 1.0);
    const double spacing = c0.total_length() / n;
    const double dt_stab = opts.c_curv * spacing * spacing / maxH;
    const int nsub = opts.semi_implicit ? 1 : std::max(1, static_cast<int>(std::ceil(dt / dt_stab)));
    const double sub = dt / nsub;

    std::vector<double> vn(static_cast<size_t>(n), 0.0);
    if (!vn_coef.empty()) vn = fourier::resample(vn_coef, n);

    ClosedCurve cur = c0;
    auto velocities = [&](const ClosedCurve& c) {
        auto g = c.sample_geometry(n);
        std::vector<Vec2> F(static_cast<size_t>(n));
        for (int j = 0; j < n; ++j) F[j] = (vn[j] + g.curvature[j]) * g.normal[j];
        return F;
    };
    for (int q = 0; q < nsub; ++q) {
        auto pts = cur.sample(n);
        auto F1 = velocities(cur);
        std::vector<Vec2> moved(pts.size());
        if (opts.semi_implicit) {
            std::vector<double> fx(n), fy(n);
            for (int j = 0; j < n; ++j) {
                fx[j] = F1[j][0];
                fy[j] = F1[j][1];
            }
            auto cfx = fourier::forward(fx);
            auto cfy = fourier::forward(fy);
            const double gmean = cur.total_length();
            for (int k = 0; k < n; ++k) {
                const int kf = fourier::signed_freq(k, n);
                const double damp = 1.0 / (1.0 + sub * std::pow(2.0 * M_PI * kf / gmean, 2));
                cfx[k] *= damp;
                cfy[k] *= damp;
            }
            auto gx = fourier::inverse(cfx);
            auto gy = fourier::inverse(cfy);
            for (int j = 0; j < n; ++j) moved[j] = pts[j] + sub * Vec2{gx[j], gy[j]};
        } else {
            std::vector<Vec2> pred(pts.size());
            for (int j = 0; j < n; ++j) pred[j] = pts[j] + sub * F1[j];
            ClosedCurve cpred = ClosedCurve::from_samples(pred, 0.0, n, false);
            auto F2 = velocities(cpred);
            for (int j = 0; j < n; ++j) moved[j] = pts[j] + 0.5 * sub * (F1[j] + F2[j]);
        }
        const bool last = (q + 1 == nsub);
        cur = ClosedCurve::from_samples(moved, t_new, n, last);  // full checks once per interval
    }
    if (cur.max_abs_curvature() > opts.curvature_bound)
        throw CurvatureBlowup("curvature exceeded the guard bound");
    if (opts.respace) cur = respace_to_equal_arclength(cur, t_new);
    return cur;
}

}  // namespace

SharpState step_sharp(const SharpState& state, double dt, const SharpOptions& opts) {
    if (state.curve.max_abs_curvature() > opts.curvature_bound)
        throw CurvatureBlowup("curvature exceeded the guard bound");
    auto vn_coef = normal_velocity_series(state.curve, opts);
    ClosedCurve next = advance_curve(state.curve, vn_coef, dt, opts, state.time + dt);
    return {std::move(next), state.time + dt};
}


SharpTrajectory run_sharp(const ClosedCurve& initial, const SharpOptions& opts) {
    SharpTrajectory traj;
    traj.options = opts;
    traj.n_samples = opts.n_samples > 0 ? opts.n_samples : initial.n_modes();

    const int steps = static_cast<int>(std::round(opts.t_final / opts.dt));
    SharpState state{initial, 0.0};

    Grid2D grid{opts.grid_n};
    for (int k = 0; k <= steps; ++k) {
        std::optional<VelocityField> vel;
        if (opts.sigma != 0.0) {
            const int mq = ib_quadrature_count(grid, state.curve);
            vel = traction_solve(grid, state.curve,
                                 capillary_traction(state.curve, mq, opts.sigma), opts.bc);
        }
        traj.times.push_back(state.time);
        traj.curves.push_back(state.curve);
        traj.traces.push_back(extract_traces(state.curve, vel ? &*vel : nullptr, traj.n_samples,
                                             opts.sigma));
        const bool want_snapshot =
            vel && ((opts.output_every > 0 && k % opts.output_every == 0) || k == steps);
        if (want_snapshot) {
            traj.snapshot_steps.push_back(k);
            traj.snapshots.push_back(*vel);
        }
        if (k < steps) {
            std::vector<fourier::cd> vn_coef;
            if (vel) {
                const int n = state.curve.n_modes();
                auto vtr = interface_trace(*vel, state.curve, n);
                std::vector<double> vn(n);
                for (int j = 0; j < n; ++j)
                    vn[j] = dot(state.curve.normal(static_cast<double>(j) / n), vtr[j]);
                vn_coef = fourier::forward(vn);
            }
            ClosedCurve next =
                advance_curve(state.curve, vn_coef, opts.dt, opts, state.time + opts.dt);
            state = SharpState{std::move(next), state.time + opts.dt};
        }
    }
    return traj;
}

std::vector<Vec2> SharpTrajectory::parametrization_velocity(int step) const {
    const int m = n_samples;
    std::vector<Vec2> out(static_cast<size_t>(m), Vec2{0.0, 0.0});
    if (times.size() < 2) return out;
    const int a = step > 0 ? step - 1 : 0;
    const int b = step + 1 < n_steps() ? step + 1 : step;
    const double dt_fd = times[b] - times[a];
    for (int j = 0; j < m; ++j) {
        const double s = static_cast<double>(j) / m;
        out[j] = (1.0 / dt_fd) * (curves[b].position(s) - curves[a].position(s));
    }
    return out;
}

std::vector<double> SharpTrajectory::dSdt(int step) const {
    auto xdot = parametrization_velocity(step);
    const int m = n_samples;
    std::vector<double> out(static_cast<size_t>(m));
    for (int j = 0; j < m; ++j) {
        const double s = static_cast<double>(j) / m;
        out[j] = -dot(curves[step].tangent(s), xdot[j]) / curves[step].speed(s);
    }
    return out;
}

void write_traces_csv(std::ostream& os, const SharpTrajectory& traj, int step) {
    os << "s,H,V,v_n,v_tau,p_jump\n";
    os.precision(17);
    const auto& T = traj.traces[step];
    const auto& c = traj.curves[step];
    const int m = traj.n_samples;
    for (int j = 0; j < m; ++j) {
        const double s = static_cast<double>(j) / m;
        Vec2 n = c.normal(s), tau = c.tangent(s);
        os << s << "," << T.H[j] << "," << T.V[j] << "," << dot(n, T.v_interface[j]) << ","
           << dot(tau, T.v_interface[j]) << "," << T.pressure_jump[j] << "\n";
    }
}

}  // namespace acstokes
