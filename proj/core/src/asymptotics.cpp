#include "acstokes/asymptotics.hpp"

#include <algorithm>
#include <cmath>

#include "acstokes/errors.hpp"

namespace acstokes {

namespace {

// periodic cubic interpolation of samples at s_j = j/m
double interp_s(const std::vector<double>& v, double s) {
    const int m = static_cast<int>(v.size());
    double t = (s - std::floor(s)) * m;
    int j = static_cast<int>(t);
    if (j >= m) j = 0;
    const double f = t - j;
    const double vm = v[(j + m - 1) % m], v0 = v[j], v1 = v[(j + 1) % m], v2 = v[(j + 2) % m];
    return vm * (-f * (f - 1.0) * (f - 2.0) / 6.0) + v0 * ((f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0) +
           v1 * (-(f + 1.0) * f * (f - 2.0) / 2.0) + v2 * ((f + 1.0) * f * (f - 1.0) / 6.0);
}

Vec2 interp_s(const std::vector<Vec2>& v, double s) {
    const int m = static_cast<int>(v.size());
    double t = (s - std::floor(s)) * m;
    int j = static_cast<int>(t);
    if (j >= m) j = 0;
    const double f = t - j;
    const double wm = -f * (f - 1.0) * (f - 2.0) / 6.0;
    const double w0 = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
    const double w1 = -(f + 1.0) * f * (f - 2.0) / 2.0;
    const double w2 = (f + 1.0) * f * (f - 1.0) / 6.0;
    const Vec2& am = v[(j + m - 1) % m];
    const Vec2& a0 = v[j];
    const Vec2& a1 = v[(j + 1) % m];
    const Vec2& a2 = v[(j + 2) % m];
    return {wm * am[0] + w0 * a0[0] + w1 * a1[0] + w2 * a2[0],
            wm * am[1] + w0 * a0[1] + w1 * a1[1] + w2 * a2[1]};
}

std::vector<double> derivative_samples(const std::vector<double>& v, int order = 1) {
    return fourier::inverse(fourier::derivative(fourier::forward(v), order));
}

// cumulative integral from the left end, fourth-order corrected trapezoid
std::vector<double> cumulative(const std::vector<double>& g, double h) {
    const int m = static_cast<int>(g.size());
    std::vector<double> out(g.size(), 0.0);
    for (int i = 1; i < m; ++i) {
        double inc;
        if (i >= 2 && i + 1 < m)
            inc = h / 24.0 * (-g[i - 2] + 13.0 * g[i - 1] + 13.0 * g[i] - g[i + 1]);
        else
            inc = 0.5 * h * (g[i - 1] + g[i]);
        out[i] = out[i - 1] + inc;
    }
    return out;
}

}  // namespace

ProfileBlending::ProfileBlending(const OptimalProfile& P) : profile(&P) {
    const int m = static_cast<int>(P.rho.size());
    const double h = P.spacing();
    std::vector<double> etap(m), zetap(m), zzetap(m), G(m);
    for (int i = 0; i < m; ++i) {
        etap[i] = 2.0 * P.dtheta[i] * P.dtheta[i] / P.sigma;  // eta' = 2 theta'^2 / sigma
        zetap[i] = P.rho[i] * etap[i];
        zzetap[i] = P.rho[i] * zetap[i];
    }
    I0 = cumulative(etap, h);
    I1 = cumulative(zetap, h);
    I2 = cumulative(zzetap, h);
    // inner integral of z^2 eta'' + 4 z eta' reduces to y^2 eta'(y) + 2 I1(y)
    for (int i = 0; i < m; ++i) G[i] = P.rho[i] * P.rho[i] * etap[i] + 2.0 * I1[i];
    J2 = cumulative(G, h);
    rho_etap = I1;
    rho_etapp.resize(m);  // cumulative of z eta'' = rho eta' - I0
    for (int i = 0; i < m; ++i) rho_etapp[i] = P.rho[i] * etap[i] - I0[i];
    I1_inf = I1.back();
    I2_inf = I2.back();
}

double ProfileBlending::at(const std::vector<double>& table, double rho) const {
    const auto& r = profile->rho;
    if (rho <= r.front()) return table.front();
    if (rho >= r.back()) return table.back();
    const double h = r[1] - r[0];
    const double t = (rho - r.front()) / h;
    size_t i = std::min(static_cast<size_t>(t), r.size() - 2);
    if (i == 0) i = 1;
    if (i + 2 >= r.size()) i = r.size() - 3;
    const double f = t - static_cast<double>(i);
    const double vm = table[i - 1], v0 = table[i], v1 = table[i + 1], v2 = table[i + 2];
    return vm * (-f * (f - 1.0) * (f - 2.0) / 6.0) + v0 * ((f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0) +
           v1 * (-(f + 1.0) * f * (f - 2.0) / 2.0) + v2 * ((f + 1.0) * f * (f - 1.0) / 6.0);
}

H1Coupling::H1Coupling(const SharpTrajectory& traj, const OptimalProfile& profile,
                       CouplingOptions opts)
    : traj_(&traj), profile_(&profile), opts_(opts) {
    data_.resize(traj.times.size());
}

std::vector<double> H1Coupling::operator()(const SurfaceField& h1, int step) {
    const int m = traj_->n_samples;
    const ClosedCurve& curve = traj_->curves[step];
    const SharpTraces& T = traj_->traces[step];

    // traction 2 h1 (n p_hat0 - 2 dn_vhat0) - sigma (lap_G h1) n
    auto metric = metric_of_curve(curve, m);
    auto h1s = h1.samples();
    auto h1ss = fourier::inverse(fourier::derivative(h1.coef(), 2));
    auto h1d = fourier::inverse(fourier::derivative(h1.coef()));
    const double sigma = profile_->sigma;

    Grid2D grid{opts_.grid_n};
    const int mq = ib_quadrature_count(grid, curve);
    TractionDensity q;
    q.samples.resize(mq);
    for (int k = 0; k < mq; ++k) {
        const double s = static_cast<double>(k) / mq;
        Vec2 n = curve.normal(s);
        const double h1v = interp_s(h1s, s);
        const double lap =
            interp_s(metric.grad_S_sq, s) * interp_s(h1ss, s) + interp_s(metric.lap_S, s) * interp_s(h1d, s);
        Vec2 a = 2.0 * h1v * (interp_s(T.p_hat0, s) * n - 2.0 * interp_s(T.dn_vhat0, s));
        a = a - (sigma * lap) * n;
        q.samples[k] = a;
    }
    VelocityField v1 = traction_solve(grid, curve, q, opts_.bc);

    V1StepData rec;
    rec.v1_trace = interface_trace(v1, curve, m);
    rec.v1_normal.resize(m);
    for (int j = 0; j < m; ++j)
        rec.v1_normal[j] = dot(curve.normal(static_cast<double>(j) / m), rec.v1_trace[j]);
    {
        std::vector<double> vx(m), vy(m);
        for (int j = 0; j < m; ++j) {
            vx[j] = rec.v1_trace[j][0];
            vy[j] = rec.v1_trace[j][1];
        }
        auto dvx = derivative_samples(vx);
        auto dvy = derivative_samples(vy);
        rec.div_tau_v1.resize(m);
        for (int j = 0; j < m; ++j) {
            const double s = static_cast<double>(j) / m;
            rec.div_tau_v1[j] =
                dot(curve.tangent(s), Vec2{dvx[j], dvy[j]}) / curve.speed(s);
        }
    }
    {
        auto tr = extract_traces(curve, &v1, m, 0.0);
        rec.dn_v1_plus = tr.dn_v_plus;
        rec.dn_v1_minus = tr.dn_v_minus;
        rec.p1_jump = tr.pressure_jump;
    }
    data_[static_cast<size_t>(step)] = rec;
    const bool keep_field =
        opts_.field_every > 0 &&
        (step % opts_.field_every == 0 || step + 1 == traj_->n_steps());
    if (keep_field) {
        field_steps_.push_back(step);
        fields_.push_back(std::move(v1));
    }
    return data_[static_cast<size_t>(step)].v1_normal;
}

TractionResponse H1Coupling::response() {
    return [this](const SurfaceField& h1, int step) { return (*this)(h1, step); };
}

double ModulationLadder::eval_b(const ProfileBlending& blend, int step, int j, double rho) const {
    const BData& d = b[static_cast<size_t>(step)];
    const OptimalProfile& P = *blend.profile;
    const double eta = P.eta_at(rho);
    const double h1 = d.h1[static_cast<size_t>(j)];
    const double rp = rho + h1;
    const double quad = 0.5 * (d.a2sum[j] + d.a2diff[j] * eta) * rp * rp;
    const double lin = 0.5 * (d.a1sum_dot[j] + d.a1diff_dot[j] * eta) * rp;
    const double tv2 = d.tv2_coef[j] * (blend.at(blend.I2, rho) + 2.0 * h1 * blend.at(blend.I1, rho) +
                                        h1 * h1 * blend.at(blend.I0, rho));
    return quad + lin + d.v1_gradh1[j] - d.divv1_h1[j] + tv2;
}

double ModulationLadder::eval_D(const OptimalProfile& P, int step, int j, double rho) const {
    return Ad[static_cast<size_t>(step)][static_cast<size_t>(j)] * P.ddtheta_at(rho) +
           Bd[static_cast<size_t>(step)][static_cast<size_t>(j)] * P.dtheta_at(rho);
}

ModulationLadder modulation_coefficients(const SharpTrajectory& traj,
                                         const std::vector<SurfaceField>& h1,
                                         const std::vector<V1StepData>& v1,
                                         const OptimalProfile& profile,
                                         const ProfileBlending& blend) {
    const int m = traj.n_samples;
    const int steps = traj.n_steps();
    ModulationLadder M;
    M.kappa1.resize(steps);
    M.kappa2.resize(steps);
    M.frakB.resize(steps);
    M.b.resize(steps);
    M.Ad.assign(steps, std::vector<double>(m, 0.0));
    M.Bd.assign(steps, std::vector<double>(m, 0.0));

    for (int k = 0; k < steps; ++k) {
        const ClosedCurve& curve = traj.curves[k];
        const SharpTraces& T = traj.traces[k];
        const double t = traj.times[k];

        std::vector<double> k1(m), k2(m);
        for (int j = 0; j < m; ++j) {
            const double H = T.H[j];
            k1[j] = H * H;    // first curvature moment of the distance expansion
            k2[j] = -H * H * H;  // second moment: lap d = -H/(1 - r H) in the plane
        }
        M.kappa1[k] = SurfaceField::from_samples(k1, t);
        M.kappa2[k] = SurfaceField::from_samples(k2, t);

        auto h1s = h1[k].samples();
        auto h1d = fourier::inverse(fourier::derivative(h1[k].coef()));
        auto h1dd = fourier::inverse(fourier::derivative(h1[k].coef(), 2));

        // b polynomial data
        ModulationLadder::BData bd;
        bd.a2sum.resize(m);
        bd.a2diff.resize(m);
        bd.a1sum_dot.resize(m);
        bd.a1diff_dot.resize(m);
        bd.v1_gradh1.resize(m);
        bd.divv1_h1.resize(m);
        bd.tv2_coef.resize(m);
        bd.h1 = h1s;
        const bool have_v1 = !v1.empty() && !v1[k].v1_trace.empty();
        for (int j = 0; j < m; ++j) {
            const double s = static_cast<double>(j) / m;
            const double sp = curve.speed(s);
            Vec2 tau = curve.tangent(s);
            Vec2 gradh1 = (h1d[j] / sp) * tau;
            bd.a2sum[j] = T.dnn_vn_plus[j] + T.dnn_vn_minus[j];
            bd.a2diff[j] = T.dnn_vn_plus[j] - T.dnn_vn_minus[j];
            bd.a1sum_dot[j] = dot(T.dn_v_plus[j] + T.dn_v_minus[j], gradh1);
            bd.a1diff_dot[j] = dot(T.dn_v_plus[j] - T.dn_v_minus[j], gradh1);
            bd.v1_gradh1[j] = have_v1 ? dot(v1[k].v1_trace[j], gradh1) : 0.0;
            bd.divv1_h1[j] = have_v1 ? v1[k].div_tau_v1[j] * h1s[j] : 0.0;
            bd.tv2_coef[j] = -bd.a2diff[j] / 4.0;
        }
        M.b[k] = std::move(bd);

        // D = Ad theta0'' + Bd theta0'
        auto xdot = traj.parametrization_velocity(k);
        std::vector<double> xdx(m), xdy(m);
        for (int j = 0; j < m; ++j) {
            xdx[j] = xdot[j][0];
            xdy[j] = xdot[j][1];
        }
        auto xdpx = derivative_samples(xdx);
        auto xdpy = derivative_samples(xdy);
        for (int j = 0; j < m; ++j) {
            const double s = static_cast<double>(j) / m;
            const double sp = curve.speed(s);
            const double H = T.H[j];
            Vec2 tau = curve.tangent(s);
            Vec2 xdp{xdpx[j], xdpy[j]};
            Vec2 dtau = (1.0 / sp) * (xdp - dot(tau, xdp) * tau);
            Vec2 dn = rot90(dtau);
            const double ddr_dtS = -dot(tau, dn) / sp - H * dot(tau, xdot[j]) / sp;
            M.Ad[k][j] = -2.0 * H * h1d[j] * h1d[j] / (sp * sp);
            M.Bd[k][j] = d_dr_grad_S_norm_sq_of(curve, s) * h1dd[j] +
                         d_dr_laplacian_S_of(curve, s) * h1d[j] - ddr_dtS * h1d[j] +
                         dot(T.v_interface[j], tau) * (H / sp) * h1d[j];
        }

        // solvability coefficient B by rho-quadrature against theta0'
        std::vector<double> frakB(m);
        const auto& rho = profile.rho;
        const double hr = profile.spacing();
        for (int j = 0; j < m; ++j) {
            double acc = 0.0;
            for (size_t i = 0; i < rho.size(); ++i) {
                const double w = (i == 0 || i + 1 == rho.size()) ? 0.5 : 1.0;
                const double th = profile.dtheta[i];
                if (th == 0.0) continue;
                const double bval = M.eval_b(blend, k, j, rho[i]);
                const double Dval = M.eval_D(profile, k, j, rho[i]);
                acc += w * (((bval - k2[j] * rho[i] * rho[i]) * th + (rho[i] + h1s[j]) * Dval) * th);
            }
            frakB[j] = acc * hr / profile.sigma;
        }
        M.frakB[k] = SurfaceField::from_samples(frakB, t);
    }
    return M;
}

InnerRhs c3_right_side(const SharpTrajectory& traj, const ModulationLadder& mod,
                       const std::vector<SurfaceField>& h1, const std::vector<SurfaceField>& h2,
                       const OptimalProfile& profile, const ProfileBlending& blend) {
    const int m = traj.n_samples;
    const int steps = traj.n_steps();
    // per-step tables of the s-dependent coefficients
    auto gg = std::make_shared<std::vector<std::vector<double>>>(steps);
    auto h1tab = std::make_shared<std::vector<std::vector<double>>>(steps);
    auto k2tab = std::make_shared<std::vector<std::vector<double>>>(steps);
    auto Btab = std::make_shared<std::vector<std::vector<double>>>(steps);
    for (int k = 0; k < steps; ++k) {
        auto m0 = metric_of_curve(traj.curves[k], m);
        auto d1 = fourier::inverse(fourier::derivative(h1[k].coef()));
        auto d2 = fourier::inverse(fourier::derivative(h2[k].coef()));
        (*gg)[k].resize(m);
        for (int j = 0; j < m; ++j) (*gg)[k][j] = m0.grad_S_sq[j] * d1[j] * d2[j];
        (*h1tab)[k] = h1[k].samples();
        (*k2tab)[k] = mod.kappa2[k].samples();
        (*Btab)[k] = mod.frakB[k].samples();
    }
    const double dt = traj.dt();
    const double t0 = traj.times.front();
    const ModulationLadder* modp = &mod;
    const OptimalProfile* P = &profile;
    const ProfileBlending* bl = &blend;
    return [=, &traj](double rho, double s, double t) {
        int k = dt > 0 ? static_cast<int>(std::round((t - t0) / dt)) : 0;
        k = std::clamp(k, 0, traj.n_steps() - 1);
        int j = static_cast<int>(std::round(s * m)) % m;
        const double h1v = (*h1tab)[k][j];
        const double bval = modp->eval_b(*bl, k, j, rho);
        const double Dval = modp->eval_D(*P, k, j, rho);
        const double k2 = (*k2tab)[k][j];
        const double Bv = (*Btab)[k][j];
        return 2.0 * (*gg)[k][j] * P->ddtheta_at(rho) -
               (bval - Bv - k2 * (rho * rho + 2.0 * rho * h1v)) * P->dtheta_at(rho) -
               (rho + h1v) * Dval;
    };
}

int ExpansionBundle::step_of_time(double t) const {
    const double dt = traj->dt();
    if (dt <= 0.0) return 0;
    return std::clamp(static_cast<int>(std::round((t - traj->times.front()) / dt)), 0,
                      traj->n_steps() - 1);
}

const InnerLayerField* ExpansionBundle::c3_at_step(int step) const {
    for (size_t i = 0; i < c3_steps.size(); ++i)
        if (c3_steps[i] == step) return &c3[i];
    return nullptr;
}

const VelocityField* ExpansionBundle::v1_field_at_step(int step) const {
    for (size_t i = 0; i < v1_field_steps.size(); ++i)
        if (v1_field_steps[i] == step) return &v1_fields[i];
    return nullptr;
}

ExpansionBundle build_expansion(const SharpTrajectory& traj, const OptimalProfile& profile,
                                const ExpansionOptions& opts) {
    ExpansionBundle B;
    B.traj = &traj;
    B.profile = &profile;
    B.blend = std::make_shared<ProfileBlending>(profile);

    H1Coupling coupling(traj, profile, opts.coupling);
    B.h1 = solve_h1(traj, coupling.response());
    // the march only queries the coupling up to the second-to-last step;
    // evaluate once more so the final traces and field exist
    if (traj.n_steps() > 0) coupling(B.h1.back(), traj.n_steps() - 1);
    B.v1 = coupling.data();
    B.v1_field_steps = coupling.field_steps();
    B.v1_fields = coupling.fields();

    B.mod = modulation_coefficients(traj, B.h1, B.v1, profile, *B.blend);

    if (opts.with_h2) {
        B.h2 = solve_h2(traj, B.h1, B.mod.frakB, B.mod.kappa2, opts.w1_source);
    } else {
        B.h2.assign(traj.times.size(), SurfaceField(traj.n_samples));
        for (int k = 0; k < traj.n_steps(); ++k) B.h2[k].set_time_tag(traj.times[k]);
    }

    return B;
}

void attach_c3(ExpansionBundle& B, double eps, const SolveC3Options& opts) {
    const SharpTrajectory& traj = *B.traj;
    auto rhs = c3_right_side(traj, B.mod, B.h1, B.h2, *B.profile, *B.blend);
    B.c3 = solve_c3(traj, rhs, eps, *B.profile, opts);
    B.c3_steps.clear();
    B.c3_steps.push_back(0);
    const int every = std::max(opts.store_every, 1);
    for (int k = 0; k + 1 < traj.n_steps(); ++k)
        if ((k + 1) % every == 0 || k + 2 == traj.n_steps()) B.c3_steps.push_back(k + 1);
}

PhaseField build_cA(const ExpansionBundle& bundle, int step, double eps, int order,
                    const Grid2D& grid, BoundaryMode bc, double delta) {
    if (grid.h() > eps / 4.0) throw ResolutionError("build_cA: layer under-resolved");
    const SharpTrajectory& traj = *bundle.traj;
    const OptimalProfile& P = *bundle.profile;
    const ClosedCurve& curve = traj.curves[step];
    TubularChart chart(curve, 0.0);
    const int m = traj.n_samples;

    auto h1s = bundle.h1[step].samples();
    auto h2s = bundle.h2[step].samples();

    // second-order slices at this step (linear in the two rho-basis solves)
    std::vector<std::vector<double>> c2;
    if (order >= 2) {
        auto metric = metric_of_curve(curve, m);
        auto h1d = fourier::inverse(fourier::derivative(bundle.h1[step].coef()));
        std::vector<double> grad_sq(m), k1(m), dv(m);
        for (int j = 0; j < m; ++j) {
            grad_sq[j] = metric.grad_S_sq[j] * h1d[j] * h1d[j];
            k1[j] = traj.traces[step].H[j] * traj.traces[step].H[j];
            dv[j] = traj.traces[step].div_tau_v[j];
        }
        c2 = c2_hat(grad_sq, k1, dv, P);
    }
    const InnerLayerField* c3 = order >= 3 ? bundle.c3_at_step(step) : nullptr;
    if (order >= 3 && c3 == nullptr)
        throw MissingTrace("build_cA: no stored third-order layer at this step");

    PhaseField out(grid, bc);
    for (int jj = 0; jj < grid.n; ++jj)
        for (int ii = 0; ii < grid.n; ++ii) {
            auto sd = chart.signed_distance(grid.center(ii, jj));
            const double far = sd.d >= 0.0 ? 1.0 : -1.0;
            const double z = cutoff(sd.d, delta);
            if (z == 0.0) {
                out.at(ii, jj) = far;
                continue;
            }
            const double h1v = interp_s(h1s, sd.s);
            const double h2v = interp_s(h2s, sd.s);
            const double rho = sd.d / eps - h1v - eps * h2v;
            double inner = P.theta_at(rho);
            if (order >= 2) {
                // bilinear in (rho, s) on the c2 tabulation
                const double t = (rho - P.rho.front()) / P.spacing();
                if (t >= 0.0 && t <= static_cast<double>(P.rho.size() - 1)) {
                    const size_t i0 = std::min(static_cast<size_t>(t), P.rho.size() - 2);
                    const double fr = t - static_cast<double>(i0);
                    double sm = sd.s - std::floor(sd.s);
                    const int j0 = std::min(static_cast<int>(sm * m), m - 1);
                    const double fs = sm * m - j0;
                    const int j1 = (j0 + 1) % m;
                    const double v0 = c2[j0][i0] * (1 - fr) + c2[j0][i0 + 1] * fr;
                    const double v1 = c2[j1][i0] * (1 - fr) + c2[j1][i0 + 1] * fr;
                    inner += eps * eps * (v0 * (1 - fs) + v1 * fs);
                }
            }
            if (order >= 3) {
                const double hr = c3->rho[1] - c3->rho[0];
                const double t = (rho - c3->rho.front()) / hr;
                if (t >= 0.0 && t <= static_cast<double>(c3->n_rho() - 1)) {
                    const int i0 = std::min(static_cast<int>(t), c3->n_rho() - 2);
                    const double fr = t - i0;
                    double sm = sd.s - std::floor(sd.s);
                    const int ms = c3->n_s();
                    const int j0 = std::min(static_cast<int>(sm * ms), ms - 1);
                    const double fs = sm * ms - j0;
                    const int j1 = (j0 + 1) % ms;
                    const double v0 = c3->data[i0][j0] * (1 - fr) + c3->data[i0 + 1][j0] * fr;
                    const double v1 = c3->data[i0][j1] * (1 - fr) + c3->data[i0 + 1][j1] * fr;
                    inner += eps * eps * eps * (v0 * (1 - fs) + v1 * fs);
                }
            }
            out.at(ii, jj) = z * inner + (1.0 - z) * far;
        }
    return out;
}

namespace {

struct TubeTraceData {  // s-sampled trace arrays used by the inner velocity
    std::vector<Vec2> v_if, dn_sum_half, vhat0_lin, dn_vhat0;
    std::vector<Vec2> v1_tr, dn1_sum_half, vhat1;
    std::vector<double> vhat1_n, p_hat0, a2diff_quarter;
    std::vector<double> p_sum_half, dn_p_sum_half, p_jump;
    std::vector<double> p1_jump;
    std::vector<double> h1, h2, gradh1_sq, lap_h1;
    std::vector<double> H;
};

TubeTraceData collect_tube_data(const ExpansionBundle& bundle, int step) {
    const SharpTrajectory& traj = *bundle.traj;
    const SharpTraces& T = traj.traces[step];
    const ClosedCurve& curve = traj.curves[step];
    const int m = traj.n_samples;
    TubeTraceData D;
    D.v_if = T.v_interface;
    D.dn_vhat0 = T.dn_vhat0;
    D.p_hat0 = T.p_hat0;
    D.p_jump = T.pressure_jump;
    D.H = T.H;
    D.dn_sum_half.resize(m);
    D.vhat0_lin.resize(m);
    D.a2diff_quarter.resize(m);
    for (int j = 0; j < m; ++j) {
        D.dn_sum_half[j] = 0.5 * (T.dn_v_plus[j] + T.dn_v_minus[j]);
        D.vhat0_lin[j] = T.dn_vhat0[j];  // vhat0(x) ~ d * dn_vhat0 near the curve
        D.a2diff_quarter[j] = 0.25 * (T.dnn_vn_plus[j] - T.dnn_vn_minus[j]);
    }
    const bool have_v1 = !bundle.v1.empty() && !bundle.v1[step].v1_trace.empty();
    D.v1_tr.assign(m, Vec2{0.0, 0.0});
    D.dn1_sum_half.assign(m, Vec2{0.0, 0.0});
    D.vhat1.assign(m, Vec2{0.0, 0.0});
    D.vhat1_n.assign(m, 0.0);
    D.p1_jump.assign(m, 0.0);
    if (have_v1) {
        const auto& V1 = bundle.v1[step];
        D.v1_tr = V1.v1_trace;
        for (int j = 0; j < m; ++j) {
            D.dn1_sum_half[j] = 0.5 * (V1.dn_v1_plus[j] + V1.dn_v1_minus[j]);
            D.vhat1[j] = 0.5 * (V1.dn_v1_plus[j] - V1.dn_v1_minus[j]);
            D.vhat1_n[j] = dot(curve.normal(static_cast<double>(j) / m), D.vhat1[j]);
        }
        D.p1_jump = V1.p1_jump;
    }
    D.h1 = bundle.h1[step].samples();
    D.h2 = bundle.h2[step].samples();
    auto metric = metric_of_curve(curve, m);
    auto h1d = fourier::inverse(fourier::derivative(bundle.h1[step].coef()));
    auto h1dd = fourier::inverse(fourier::derivative(bundle.h1[step].coef(), 2));
    D.gradh1_sq.resize(m);
    D.lap_h1.resize(m);
    for (int j = 0; j < m; ++j) {
        D.gradh1_sq[j] = metric.grad_S_sq[j] * h1d[j] * h1d[j];
        D.lap_h1[j] = metric.grad_S_sq[j] * h1dd[j] + metric.lap_S[j] * h1d[j];
    }
    // pressure one-sided sums from the stored snapshot fits
    D.p_sum_half.assign(m, 0.0);
    D.dn_p_sum_half.assign(m, 0.0);
    return D;
}

}  // namespace

ApproxVelocity build_vA(const ExpansionBundle& bundle, int step, double eps, int order,
                        const Grid2D& grid, BoundaryMode bc, double delta,
                        double seam_tolerance) {
    const SharpTrajectory& traj = *bundle.traj;
    const OptimalProfile& P = *bundle.profile;
    const ProfileBlending& blend = *bundle.blend;
    const ClosedCurve& curve = traj.curves[step];
    TubularChart chart(curve, 0.0);
    const int m = traj.n_samples;

    // outer fields: the sharp solve snapshot and, at order >= 1, the v1 field
    const VelocityField* v0field = nullptr;
    for (size_t i = 0; i < traj.snapshot_steps.size(); ++i)
        if (traj.snapshot_steps[i] == step) v0field = &traj.snapshots[i];
    if (v0field == nullptr)
        throw MissingTrace("build_vA: no stored sharp velocity snapshot at this step");
    const VelocityField* v1field = order >= 1 ? bundle.v1_field_at_step(step) : nullptr;
    if (order >= 1 && v1field == nullptr)
        throw MissingTrace("build_vA: no stored v1 field at this step");

    TubeTraceData D = collect_tube_data(bundle, step);
    // one-sided pressure extrapolation data for the p0 piece
    {
        const SharpTraces& T = traj.traces[step];
        const double hgrid = v0field->grid().h();
        const std::vector<double> offs{3.5 * hgrid, 4.5 * hgrid, 5.5 * hgrid, 6.5 * hgrid,
                                       7.5 * hgrid};
        for (int j = 0; j < m; ++j) {
            const double s = static_cast<double>(j) / m;
            Vec2 x0 = curve.position(s), n = curve.normal(s);
            OneSidedFit fits[2];
            for (int side = 0; side < 2; ++side) {
                const double sgn = side == 0 ? 1.0 : -1.0;
                std::vector<double> rr(offs.size()), pv(offs.size());
                for (size_t k = 0; k < offs.size(); ++k) {
                    rr[k] = sgn * offs[k];
                    pv[k] = v0field->sample_p(x0 + rr[k] * n);
                }
                fits[side] = one_sided_fit(rr, pv);
            }
            D.p_sum_half[j] = 0.5 * (fits[0].value + fits[1].value);
            D.dn_p_sum_half[j] = 0.5 * (fits[0].slope + fits[1].slope);
        }
        (void)T;
    }

    ApproxVelocity out;
    out.v = VelocityField(grid, bc);
    out.p_minus1 = PhaseField(grid, bc);
    out.p0 = PhaseField(grid, bc);
    out.p1 = PhaseField(grid, bc);

    double seam = 0.0;
    auto inner_velocity = [&](double d, double s, double rho) {
        Vec2 n = curve.normal(s), tau = curve.tangent(s);
        const double eta = P.eta_at(rho);
        const double h1v = interp_s(D.h1, s);
        Vec2 vtilde0 = interp_s(D.v_if, s) + d * interp_s(D.dn_sum_half, s);
        Vec2 vhat0 = d * interp_s(D.vhat0_lin, s);
        Vec2 v = vtilde0 + (eta * d) * vhat0;
        if (order >= 1) {
            Vec2 vtilde1 = interp_s(D.v1_tr, s) + d * interp_s(D.dn1_sum_half, s);
            Vec2 vhat1 = interp_s(D.vhat1, s);
            v = v + eps * (vtilde1 + (eta * d) * vhat1);
        }
        if (order >= 2) {
            const double aj = interp_s(D.a2diff_quarter, s);
            const double I2rho = blend.at(blend.I2, rho) + 2.0 * h1v * blend.at(blend.I1, rho) +
                                 h1v * h1v * blend.at(blend.I0, rho);
            const double v2n = -aj * I2rho;
            const double dnvhat0_tau = dot(tau, interp_s(D.dn_vhat0, s));
            const double v2t = -dnvhat0_tau * (blend.at(blend.J2, rho) - h1v * h1v * (eta + 1.0));
            v = v + (eps * eps) * (v2n * n + v2t * tau);
        }
        return v;
    };
    auto outer_velocity = [&](Vec2 x) {
        Vec2 v = v0field->sample(x);
        if (order >= 1) {
            Vec2 w = v1field->sample(x);
            v = v + eps * w;
        }
        return v;
    };

    auto assemble = [&](Vec2 x, int component) {
        auto sd = chart.signed_distance(x);
        const double z = cutoff(sd.d, delta);
        Vec2 vout = outer_velocity(x);
        if (z == 0.0) return component == 0 ? vout[0] : vout[1];
        const double h1v = interp_s(D.h1, sd.s);
        const double h2v = interp_s(D.h2, sd.s);
        const double rho = sd.d / eps - h1v - eps * h2v;
        Vec2 vin = inner_velocity(sd.d, sd.s, rho);
        if (std::abs(sd.d) > delta && std::abs(sd.d) < 2.0 * delta)
            seam = std::max(seam, norm(vin - vout));
        Vec2 v = z * vin + (1.0 - z) * vout;
        return component == 0 ? v[0] : v[1];
    };

    const int n = grid.n;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < out.v.nu_x(); ++i) out.v.u(i, j) = assemble(grid.u_face(i, j), 0);
    for (int j = 0; j < out.v.nv_y(); ++j)
        for (int i = 0; i < n; ++i) out.v.v(i, j) = assemble(grid.v_face(i, j), 1);

    // pressure pieces at cell centers
    const double sigma = P.sigma;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            Vec2 x = grid.center(i, j);
            auto sd = chart.signed_distance(x);
            const double z = cutoff(sd.d, delta);
            const double pout = v0field->sample_p(x);
            if (z == 0.0) {
                out.p0.at(i, j) = pout;
                continue;
            }
            const double h1v = interp_s(D.h1, sd.s);
            const double h2v = interp_s(D.h2, sd.s);
            const double rho = sd.d / eps - h1v - eps * h2v;
            const double eta = P.eta_at(rho);
            const double thp = P.dtheta_at(rho);
            out.p_minus1.at(i, j) = z * (-thp * thp);
            const double lapd = chart.laplacian_distance(sd.d, sd.s);
            const double ptilde0 = interp_s(D.p_sum_half, sd.s) +
                                   sd.d * interp_s(D.dn_p_sum_half, sd.s) -
                                   0.5 * sigma * lapd * eta;
            const double phat0 = interp_s(D.p_hat0, sd.s);
            const double p0in = ptilde0 + eta * sd.d * phat0;
            out.p0.at(i, j) = z * p0in + (1.0 - z) * pout;
            if (order >= 1) {
                // p1(rho,x) = (1+eta)/2 ([p1] - Ainf) + Acum(rho)
                const double vh1n = interp_s(D.vhat1_n, sd.s);
                const double ph0 = phat0;
                const double av0n = dot(curve.normal(sd.s), interp_s(D.dn_vhat0, sd.s));
                const double gh1 = interp_s(D.gradh1_sq, sd.s);
                const double lh1 = interp_s(D.lap_h1, sd.s);
                const double etap = 2.0 * thp * thp / sigma;
                const double I0r = blend.at(blend.I0, rho);
                const double C1 = rho * etap - I0r;  // cumulative of z eta''
                const double C4 = blend.at(blend.I1, rho);
                const double Acum = vh1n * (-C1 - h1v * etap + 2.0 * I0r) +
                                    ph0 * (-C4 - h1v * I0r) + av0n * (2.0 * C4 + 2.0 * h1v * I0r) +
                                    gh1 * (-thp * thp) + lh1 * 0.5 * sigma * I0r;
                const double Ainf = 6.0 * vh1n - 2.0 * h1v * ph0 + 4.0 * h1v * av0n + sigma * lh1;
                const double pj1 = interp_s(D.p1_jump, sd.s);
                out.p1.at(i, j) = z * (0.5 * (1.0 + eta) * (pj1 - Ainf) + Acum);
            }
        }

    out.seam_mismatch = seam;
    if (seam_tolerance > 0.0 && seam > seam_tolerance)
        throw SeamDiscontinuity("glue-region mismatch exceeds the tolerance");
    return out;
}

}  // namespace acstokes
