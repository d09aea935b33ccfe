#include "acstokes/surface_pde.hpp"

#include <cmath>
#include <ostream>

#include "acstokes/errors.hpp"
#include "acstokes/sharp.hpp"

namespace acstokes {

SurfaceMetricSample metric_of_curve(const ClosedCurve& curve, int n_samples) {
    SurfaceMetricSample m;
    m.grad_S_sq.resize(n_samples);
    m.lap_S.resize(n_samples);
    m.grad_S.resize(n_samples);
    m.dSdt.assign(n_samples, 0.0);
    for (int j = 0; j < n_samples; ++j) {
        const double s = static_cast<double>(j) / n_samples;
        const double sp = curve.speed(s);
        const double spd = curve.speed_derivative(s);
        m.grad_S_sq[j] = 1.0 / (sp * sp);
        m.lap_S[j] = -spd / (sp * sp * sp);
        m.grad_S[j] = (1.0 / sp) * curve.tangent(s);
    }
    return m;
}

namespace {

// phi1(z) = (e^z - 1)/z, phi2(z) = (e^z - 1 - z)/z^2, stable near 0
double phi1(double z) {
    if (std::abs(z) < 1e-6) return 1.0 + 0.5 * z + z * z / 6.0;
    return std::expm1(z) / z;
}
double phi2(double z) {
    if (std::abs(z) < 1e-5) return 0.5 + z / 6.0 + z * z / 24.0;
    return (std::expm1(z) - z) / (z * z);
}

struct ExplicitPart {
    const SurfaceParabolicProblem* P;
    double k0sq;  // constant coefficient handled by the exponential part

    std::vector<double> operator()(const std::vector<fourier::cd>& coef, double t) const {
        const int n = static_cast<int>(coef.size());
        SurfaceMetricSample metric =
            P->metric ? P->metric(t) : SurfaceMetricSample{};
        auto need = [&](std::vector<double>& v) {
            if (static_cast<int>(v.size()) != n) v.assign(n, 0.0);
        };
        need(metric.grad_S_sq);
        need(metric.lap_S);
        need(metric.dSdt);
        if (static_cast<int>(metric.grad_S.size()) != n) metric.grad_S.assign(n, Vec2{0.0, 0.0});

        auto hs = fourier::inverse(fourier::derivative(coef));
        auto hss = fourier::inverse(fourier::derivative(coef, 2));
        auto h = fourier::inverse(coef);

        std::vector<Vec2> w;
        if (P->drift) w = P->drift(t);
        std::vector<double> a;
        if (P->reaction) a = P->reaction(t);
        std::vector<double> g;
        if (P->source) g = P->source(t);

        std::vector<double> out(static_cast<size_t>(n));
        for (int j = 0; j < n; ++j) {
            double adv = metric.dSdt[j];
            if (!w.empty()) adv += dot(w[j], metric.grad_S[j]);
            double val = (metric.grad_S_sq[j] - k0sq) * hss[j] + (metric.lap_S[j] - adv) * hs[j];
            if (!a.empty()) val -= a[j] * h[j];
            if (!g.empty()) val += g[j];
            out[j] = val;
        }
        return out;
    }
};

}  // namespace

SurfaceField advance_surface_heat(const SurfaceField& h, const SurfaceParabolicProblem& problem,
                                  double dt) {
    if (!(dt > 0.0)) throw ConfigError("advance_surface_heat: dt must be positive");
    const int n = h.n_modes();
    const double t = h.time_tag();

    double k0sq = 1.0;
    if (problem.metric) {
        const auto m = problem.metric(t);
        double acc = 0.0;
        for (double v : m.grad_S_sq) acc += v;
        k0sq = m.grad_S_sq.empty() ? 0.0 : acc / m.grad_S_sq.size();
    }
    ExplicitPart E{&problem, k0sq};

    auto En = E(h.coef(), t);
    auto En_coef = fourier::forward(En);

    // stage 1: a = e^{dtA} h + dt phi1(dtA) E(h, t)
    SurfaceField a_stage(n, t + dt);
    for (int k = 0; k < n; ++k) {
        const int kf = fourier::signed_freq(k, n);
        const double lam = -k0sq * (2.0 * M_PI * kf) * (2.0 * M_PI * kf);
        const double z = dt * lam;
        a_stage.coef()[k] = std::exp(z) * h.coef()[k] + dt * phi1(z) * En_coef[k];
    }
    a_stage.make_real();

    // stage 2: h' = a + dt phi2(dtA) (E(a, t+dt) - E(h, t))
    auto Ea = E(a_stage.coef(), t + dt);
    std::vector<double> diff(Ea.size());
    for (size_t j = 0; j < Ea.size(); ++j) diff[j] = Ea[j] - En[j];
    auto diff_coef = fourier::forward(diff);

    SurfaceField out(n, t + dt);
    for (int k = 0; k < n; ++k) {
        const int kf = fourier::signed_freq(k, n);
        const double lam = -k0sq * (2.0 * M_PI * kf) * (2.0 * M_PI * kf);
        const double z = dt * lam;
        out.coef()[k] = a_stage.coef()[k] + dt * phi2(z) * diff_coef[k];
    }
    out.make_real();

    const double before = std::max(h.l2_norm(), 1e-14);
    if (out.l2_norm() > problem.growth_bound * before + 1e3 * dt)
        throw StabilityViolation("surface step grew beyond the configured bound");
    return out;
}

namespace {

std::vector<double> lerp(const std::vector<double>& a, const std::vector<double>& b, double f) {
    std::vector<double> out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = (1.0 - f) * a[i] + f * b[i];
    return out;
}
std::vector<Vec2> lerp(const std::vector<Vec2>& a, const std::vector<Vec2>& b, double f) {
    std::vector<Vec2> out(a.size());
    for (size_t i = 0; i < a.size(); ++i)
        out[i] = {(1.0 - f) * a[i][0] + f * b[i][0], (1.0 - f) * a[i][1] + f * b[i][1]};
    return out;
}

// shared coefficient structure of the h1/h2 equations on one ladder interval
struct IntervalCoefficients {
    SurfaceMetricSample m0, m1;
    std::vector<Vec2> w0, w1;      // drift -X0*(v)
    std::vector<double> a0, a1;    // reaction -kappa1 + X0*(div_tau v)
    double t0, t1;

    SurfaceParabolicProblem problem(std::vector<double> source0,
                                    std::vector<double> source1) const {
        SurfaceParabolicProblem P;
        const double ta = t0, tb = t1;
        const auto& self = *this;
        P.metric = [self, ta, tb](double t) {
            const double f = tb > ta ? std::clamp((t - ta) / (tb - ta), 0.0, 1.0) : 0.0;
            SurfaceMetricSample m;
            m.grad_S_sq = lerp(self.m0.grad_S_sq, self.m1.grad_S_sq, f);
            m.lap_S = lerp(self.m0.lap_S, self.m1.lap_S, f);
            m.grad_S = lerp(self.m0.grad_S, self.m1.grad_S, f);
            m.dSdt = lerp(self.m0.dSdt, self.m1.dSdt, f);
            return m;
        };
        P.drift = [self, ta, tb](double t) {
            const double f = tb > ta ? std::clamp((t - ta) / (tb - ta), 0.0, 1.0) : 0.0;
            return lerp(self.w0, self.w1, f);
        };
        P.reaction = [self, ta, tb](double t) {
            const double f = tb > ta ? std::clamp((t - ta) / (tb - ta), 0.0, 1.0) : 0.0;
            return lerp(self.a0, self.a1, f);
        };
        P.source = [s0 = std::move(source0), s1 = std::move(source1), ta, tb](double t) {
            const double f = tb > ta ? std::clamp((t - ta) / (tb - ta), 0.0, 1.0) : 0.0;
            return lerp(s0, s1, f);
        };
        return P;
    }
};

IntervalCoefficients interval_coefficients(const SharpTrajectory& traj, int k) {
    IntervalCoefficients C;
    const int m = traj.n_samples;
    C.t0 = traj.times[k];
    C.t1 = traj.times[k + 1];
    C.m0 = metric_of_curve(traj.curves[k], m);
    C.m0.dSdt = traj.dSdt(k);
    C.m1 = metric_of_curve(traj.curves[k + 1], m);
    C.m1.dSdt = traj.dSdt(k + 1);
    auto react = [&](int step) {
        std::vector<double> a(m);
        for (int j = 0; j < m; ++j)
            a[j] = -traj.traces[step].H[j] * traj.traces[step].H[j] +
                   traj.traces[step].div_tau_v[j];
        return a;
    };
    auto drift = [&](int step) {
        std::vector<Vec2> w(m);
        for (int j = 0; j < m; ++j) w[j] = -1.0 * traj.traces[step].v_interface[j];
        return w;
    };
    C.a0 = react(k);
    C.a1 = react(k + 1);
    C.w0 = drift(k);
    C.w1 = drift(k + 1);
    return C;
}

}  // namespace

std::vector<SurfaceField> solve_h1(const SharpTrajectory& traj, const TractionResponse& coupling) {
    const int m = traj.n_samples;
    std::vector<SurfaceField> ladder;
    ladder.reserve(traj.times.size());
    SurfaceField h(m, traj.times.empty() ? 0.0 : traj.times.front());
    ladder.push_back(h);
    for (int k = 0; k + 1 < traj.n_steps(); ++k) {
        IntervalCoefficients C = interval_coefficients(traj, k);
        // the Stokes coupling is frozen over the step
        std::vector<double> g = coupling(h, k);
        auto P = C.problem(g, g);
        h = advance_surface_heat(h, P, C.t1 - C.t0);
        ladder.push_back(h);
    }
    return ladder;
}

std::vector<SurfaceField> solve_h2(const SharpTrajectory& traj,
                                   const std::vector<SurfaceField>& h1,
                                   const std::vector<SurfaceField>& frakB,
                                   const std::vector<SurfaceField>& kappa2,
                                   const std::vector<SurfaceField>& w1_source) {
    const int m = traj.n_samples;
    auto source_at = [&](int step) {
        std::vector<double> g = frakB[step].samples();
        auto h1s = h1[step].samples();
        auto k2 = kappa2[step].samples();
        for (int j = 0; j < m; ++j) g[j] -= k2[j] * h1s[j] * h1s[j];
        if (!w1_source.empty()) {
            auto w = w1_source[step].samples();
            for (int j = 0; j < m; ++j) g[j] += w[j];
        }
        return g;
    };
    std::vector<SurfaceField> ladder;
    ladder.reserve(traj.times.size());
    SurfaceField h(m, traj.times.empty() ? 0.0 : traj.times.front());
    ladder.push_back(h);
    for (int k = 0; k + 1 < traj.n_steps(); ++k) {
        IntervalCoefficients C = interval_coefficients(traj, k);
        auto P = C.problem(source_at(k), source_at(k + 1));
        h = advance_surface_heat(h, P, C.t1 - C.t0);
        ladder.push_back(h);
    }
    return ladder;
}

namespace {

// tridiagonal solve with separate real arrays (Thomas)
void tri_solve_inplace(const std::vector<double>& sub, std::vector<double> diag,
                       const std::vector<double>& sup, std::vector<double>& rhs) {
    const size_t n = diag.size();
    for (size_t i = 1; i < n; ++i) {
        const double mfac = sub[i - 1] / diag[i - 1];
        diag[i] -= mfac * sup[i - 1];
        rhs[i] -= mfac * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

}  // namespace

std::vector<InnerLayerField> solve_c3(const SharpTrajectory& traj, const InnerRhs& rhs, double eps,
                                      const OptimalProfile& profile, const SolveC3Options& opts) {
    const int m = traj.n_samples;
    const int nr = opts.n_rho + 1;
    const double hr = 2.0 * opts.rho_max / opts.n_rho;

    std::vector<double> rho(nr), th(nr), q(nr), dth(nr);
    for (int i = 0; i < nr; ++i) {
        rho[i] = -opts.rho_max + i * hr;
        th[i] = profile.theta_at(rho[i]);
        q[i] = profile.well.ddf(th[i]);
        dth[i] = profile.dtheta_at(rho[i]);
    }
    double sig_r = 0.0;
    for (int i = 0; i < nr; ++i) sig_r += ((i == 0 || i == nr - 1) ? 0.5 : 1.0) * dth[i] * dth[i];
    sig_r *= hr;

    auto rho_mass = [&](const std::vector<double>& col) {
        double s = 0.0;
        for (int i = 0; i < nr; ++i) s += ((i == 0 || i == nr - 1) ? 0.5 : 1.0) * col[i] * dth[i];
        return s * hr;
    };

    InnerLayerField c;
    c.rho = rho;
    c.data.assign(nr, std::vector<double>(m, 0.0));
    c.time_tag = traj.times.empty() ? 0.0 : traj.times.front();

    std::vector<InnerLayerField> ladder;
    ladder.push_back(c);

    const double eps2inv = 1.0 / (eps * eps);
    std::vector<double> col(nr);

    for (int k = 0; k + 1 < traj.n_steps(); ++k) {
        const double t = traj.times[k];
        const double dt = traj.times[k + 1] - t;
        SurfaceMetricSample metric = metric_of_curve(traj.curves[k], m);
        metric.dSdt = traj.dSdt(k);
        double k0sq = 0.0;
        for (double g : metric.grad_S_sq) k0sq += g;
        k0sq /= m;

        // compatibility guard: the rho-mass of the right side must vanish
        double max_mass = 0.0, rhs_scale = 0.0;
        std::vector<std::vector<double>> R(nr, std::vector<double>(m));
        for (int j = 0; j < m; ++j) {
            const double s = static_cast<double>(j) / m;
            for (int i = 0; i < nr; ++i) {
                R[i][j] = rhs(rho[i], s, t);
                rhs_scale = std::max(rhs_scale, std::abs(R[i][j]));
            }
        }
        for (int j = 0; j < m; ++j) {
            for (int i = 0; i < nr; ++i) col[i] = R[i][j];
            max_mass = std::max(max_mass, std::abs(rho_mass(col)));
        }
        if (max_mass > opts.compat_tol * std::max(rhs_scale, 1e-300) * opts.drift_factor)
            throw CompatibilityDrift("rho-compatibility of the c3 right side violated");

        // explicit terms in real space: variable-coefficient part of lap_G and the drift
        std::vector<std::vector<double>> expl(nr, std::vector<double>(m, 0.0));
        for (int i = 0; i < nr; ++i) {
            auto coefs = fourier::forward(c.data[i]);
            auto ds = fourier::inverse(fourier::derivative(coefs));
            auto dss = fourier::inverse(fourier::derivative(coefs, 2));
            for (int j = 0; j < m; ++j)
                expl[i][j] = (metric.grad_S_sq[j] - k0sq) * dss[j] + metric.lap_S[j] * ds[j] -
                             metric.dSdt[j] * ds[j];
        }

        // implicit solve per s-mode: (I + dt (eps^-2 L + k0^2 (2 pi kf)^2)) c = b
        std::vector<std::vector<fourier::cd>> chat(nr), bhat(nr);
        for (int i = 0; i < nr; ++i) {
            std::vector<double> brow(m);
            for (int j = 0; j < m; ++j)
                brow[j] = c.data[i][j] + dt * (expl[i][j] + eps2inv * R[i][j]);
            bhat[i] = fourier::forward(brow);
            chat[i].assign(m, fourier::cd(0.0, 0.0));
        }
        std::vector<double> sub(nr - 1), sup(nr - 1), diag(nr), re(nr), im(nr);
        for (int j = 0; j < m; ++j) {
            const int kf = fourier::signed_freq(j, m);
            const double ksym = k0sq * std::pow(2.0 * M_PI * kf, 2);
            for (int i = 0; i < nr - 1; ++i) sub[i] = sup[i] = -dt * eps2inv / (hr * hr);
            for (int i = 0; i < nr; ++i)
                diag[i] = 1.0 + dt * (eps2inv * (2.0 / (hr * hr) + q[i]) + ksym);
            for (int i = 0; i < nr; ++i) {
                re[i] = bhat[i][j].real();
                im[i] = bhat[i][j].imag();
            }
            tri_solve_inplace(sub, diag, sup, re);
            tri_solve_inplace(sub, diag, sup, im);
            for (int i = 0; i < nr; ++i) chat[i][j] = fourier::cd(re[i], im[i]);
        }
        for (int i = 0; i < nr; ++i) c.data[i] = fourier::inverse(chat[i]);

        // project out the theta0' component column by column
        for (int j = 0; j < m; ++j) {
            for (int i = 0; i < nr; ++i) col[i] = c.data[i][j];
            const double mass = rho_mass(col) / sig_r;
            for (int i = 0; i < nr; ++i) c.data[i][j] -= mass * dth[i];
        }
        c.time_tag = traj.times[k + 1];
        const bool is_last = (k + 2 == traj.n_steps());
        if ((k + 1) % std::max(opts.store_every, 1) == 0 || is_last) ladder.push_back(c);
    }
    return ladder;
}

void write_ladder_csv(std::ostream& os, const std::vector<SurfaceField>& ladder) {
    os << "t,s,value\n";
    os.precision(17);
    for (const auto& field : ladder) {
        auto vals = field.samples();
        const int m = static_cast<int>(vals.size());
        for (int j = 0; j < m; ++j)
            os << field.time_tag() << "," << static_cast<double>(j) / m << "," << vals[j] << "\n";
    }
}

}  // namespace acstokes
