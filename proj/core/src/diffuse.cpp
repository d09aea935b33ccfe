#include "acstokes/diffuse.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>

#include "acstokes/errors.hpp"

namespace acstokes {

namespace {

double bump(double t) {  // smooth step: 1 at t <= 0, 0 at t >= 1
    if (t <= 0.0) return 1.0;
    if (t >= 1.0) return 0.0;
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    return b / (a + b);
}

}  // namespace

double cutoff(double s, double delta) { return bump((std::abs(s) - delta) / delta); }

double cutoff_derivative(double s, double delta) {
    const double h = 1e-6 * delta;
    return (cutoff(s + h, delta) - cutoff(s - h, delta)) / (2.0 * h);
}

double diffuse_phase_value(const TubularChart& chart, const OptimalProfile& profile, double eps,
                           double delta, Vec2 x) {
    auto sd = chart.signed_distance(x);
    const double z = cutoff(sd.d, delta);
    const double farv = sd.d >= 0.0 ? 1.0 : -1.0;
    if (z == 0.0) return farv;
    return z * profile.theta_at(sd.d / eps) + (1.0 - z) * farv;
}

PhaseField init_phase(const TubularChart& chart, double eps, const OptimalProfile& profile,
                      const Grid2D& grid, BoundaryMode bc, double delta) {
    if (grid.h() > eps / 4.0)
        throw ResolutionError("init_phase: grid spacing h exceeds eps/4, layer under-resolved");
    if (!(eps < chart.delta()))
        throw ResolutionError("init_phase: eps must be smaller than the tube half width");
    PhaseField c(grid, bc);
    for (int j = 0; j < grid.n; ++j)
        for (int i = 0; i < grid.n; ++i)
            c.at(i, j) = diffuse_phase_value(chart, profile, eps, delta, grid.center(i, j));
    return c;
}

PhaseField chemical_potential(const PhaseField& c, double eps, const DoubleWell& well) {
    const Grid2D grid = c.grid();
    const double h = grid.h();
    PhaseField mu(grid, c.bc());
    for (int j = 0; j < grid.n; ++j)
        for (int i = 0; i < grid.n; ++i) {
            const double lap = (c.ghosted(i + 1, j) + c.ghosted(i - 1, j) + c.ghosted(i, j + 1) +
                                c.ghosted(i, j - 1) - 4.0 * c.at(i, j)) /
                               (h * h);
            mu.at(i, j) = -eps * lap + well.df(c.at(i, j)) / eps;
        }
    return mu;
}

double phase_energy(const PhaseField& c, double eps, const DoubleWell& well) {
    const Grid2D grid = c.grid();
    const int n = grid.n;
    const double h = grid.h();
    double grad2 = 0.0, pot = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double dx = c.ghosted(i + 1, j) - c.at(i, j);
            const double dy = c.ghosted(i, j + 1) - c.at(i, j);
            grad2 += dx * dx + dy * dy;
            pot += well.f(c.at(i, j));
        }
    return 0.5 * eps * grad2 + pot * h * h / eps;
}

namespace {

// Helmholtz solve (alpha - lap) x = rhs, periodic by FFT or Dirichlet (value
// boundary folded by the caller) by double sine transform.
fftw_plan plan_r2r_2d_same(int n, fftw_r2r_kind ky, fftw_r2r_kind kx, std::vector<double>& buf) {
    static std::map<std::tuple<int, int, int>, fftw_plan> cache;
    auto key = std::make_tuple(n, static_cast<int>(ky), static_cast<int>(kx));
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    fftw_plan p =
        fftw_plan_r2r_2d(n, n, buf.data(), buf.data(), ky, kx, FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache.emplace(key, p);
    return p;
}

void helmholtz_periodic(std::vector<double>& rhs, int n, double h, double alpha) {
    std::vector<std::complex<double>> a(rhs.size());
    for (size_t k = 0; k < rhs.size(); ++k) a[k] = rhs[k];
    static std::map<std::pair<int, int>, fftw_plan> cache;
    auto plan = [&](int sign) {
        auto key = std::make_pair(n, sign);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        fftw_plan p = fftw_plan_dft_2d(n, n, reinterpret_cast<fftw_complex*>(a.data()),
                                       reinterpret_cast<fftw_complex*>(a.data()), sign,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        cache.emplace(key, p);
        return p;
    };
    fftw_execute_dft(plan(FFTW_FORWARD), reinterpret_cast<fftw_complex*>(a.data()),
                     reinterpret_cast<fftw_complex*>(a.data()));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double mu = (4.0 * std::pow(std::sin(M_PI * i / n), 2) +
                               4.0 * std::pow(std::sin(M_PI * j / n), 2)) /
                              (h * h);
            a[static_cast<size_t>(j) * n + i] /= (alpha + mu);
        }
    fftw_execute_dft(plan(FFTW_BACKWARD), reinterpret_cast<fftw_complex*>(a.data()),
                     reinterpret_cast<fftw_complex*>(a.data()));
    for (size_t k = 0; k < rhs.size(); ++k) rhs[k] = a[k].real() / (n * n);
}

// homogeneous half-sample Dirichlet in both directions (DST-II basis)
void helmholtz_dirichlet0(std::vector<double>& rhs, int n, double h, double alpha) {
    fftw_plan fwd = plan_r2r_2d_same(n, FFTW_RODFT10, FFTW_RODFT10, rhs);
    fftw_plan bwd = plan_r2r_2d_same(n, FFTW_RODFT01, FFTW_RODFT01, rhs);
    fftw_execute_r2r(fwd, rhs.data(), rhs.data());
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double lx = -4.0 * std::pow(std::sin(M_PI * (i + 1) / (2 * n)), 2);
            const double ly = -4.0 * std::pow(std::sin(M_PI * (j + 1) / (2 * n)), 2);
            rhs[static_cast<size_t>(j) * n + i] /= (alpha - (lx + ly) / (h * h));
        }
    fftw_execute_r2r(bwd, rhs.data(), rhs.data());
    const double scale = 1.0 / (4.0 * n * n);
    for (auto& x : rhs) x *= scale;
}

}  // namespace

DiffuseState step(const DiffuseState& state, double dt, const DiffuseOptions& opts,
                  const OptimalProfile& profile) {
    const Grid2D grid = state.c.grid();
    const int n = grid.n;
    const double h = grid.h();
    const double eps = state.eps;
    if (dt > opts.c_stab * eps * eps * (1.0 + 1e-12))
        throw ConfigError("diffuse step: dt exceeds the configured stability bound c_stab eps^2");

    DiffuseState next = state;
    next.time = state.time + dt;

    // (i) quasi-static Stokes response to the capillary force
    if (!opts.disable_flow) {
        FaceField F = capillary_force(state.c, eps);
        next.vel = stokes_solve(grid, F, opts.bc);
    } else {
        next.vel = VelocityField(grid, opts.bc);
    }

    // (ii) semi-implicit Allen-Cahn update
    const DoubleWell& well = profile.well;
    const double kappa_split = [&] {
        double m = 0.0;
        for (int k = 0; k <= 44; ++k) m = std::max(m, well.ddf(-1.1 + 0.05 * k));
        return m;
    }();

    // explicit part N(c) = -v.grad c - (f'(c) - kappa c)/eps^2 at the current level
    std::vector<double> expl(grid.cells());
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double cc = state.c.at(i, j);
            // second-order upwind-biased advection with face-averaged velocity
            double adv = 0.0;
            if (!opts.disable_flow) {
                const double uc = 0.5 * (next.vel.u_wrap(i, j) + next.vel.u_wrap(i + 1, j));
                const double vc = 0.5 * (next.vel.v_wrap(i, j) + next.vel.v_wrap(i, j + 1));
                const double cx =
                    uc > 0.0
                        ? (3.0 * cc - 4.0 * state.c.ghosted(i - 1, j) + state.c.ghosted(i - 2, j)) /
                              (2.0 * h)
                        : (-3.0 * cc + 4.0 * state.c.ghosted(i + 1, j) -
                           state.c.ghosted(i + 2, j)) /
                              (2.0 * h);
                const double cy =
                    vc > 0.0
                        ? (3.0 * cc - 4.0 * state.c.ghosted(i, j - 1) + state.c.ghosted(i, j - 2)) /
                              (2.0 * h)
                        : (-3.0 * cc + 4.0 * state.c.ghosted(i, j + 1) -
                           state.c.ghosted(i, j + 2)) /
                              (2.0 * h);
                adv = uc * cx + vc * cy;
            }
            expl[grid.idx(i, j)] = -adv - (well.df(cc) - kappa_split * cc) / (eps * eps);
        }

    std::vector<double> rhs(grid.cells());
    double alpha;
    if (state.has_history) {
        // two-step backward differentiation with extrapolated explicit part
        alpha = 1.5 / dt + kappa_split / (eps * eps);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const size_t id = grid.idx(i, j);
                rhs[id] = (4.0 * state.c.at(i, j) - state.prev_c.at(i, j)) / (2.0 * dt) +
                          2.0 * expl[id] - state.prev_explicit[id];
            }
    } else {
        alpha = 1.0 / dt + kappa_split / (eps * eps);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const size_t id = grid.idx(i, j);
                rhs[id] = state.c.at(i, j) / dt + expl[id];
            }
    }

    if (opts.bc == BoundaryMode::Periodic) {
        helmholtz_periodic(rhs, n, h, alpha);
        next.c.data() = rhs;
    } else {
        // substitute w = c + 1 (w vanishes on the wall): (alpha - lap) w = rhs + alpha
        for (auto& x : rhs) x += alpha * 1.0;
        // the +1 shift leaves lap w = lap c unchanged except through the ghost
        // convention, which PhaseField::ghosted already encodes
        helmholtz_dirichlet0(rhs, n, h, alpha);
        for (size_t k = 0; k < rhs.size(); ++k) next.c.data()[k] = rhs[k] - 1.0;
    }
    next.prev_c = state.c;
    next.prev_explicit = std::move(expl);
    next.has_history = true;

    const double sup = next.c.max_abs();
    if (sup > state.initial_sup + opts.max_growth)
        throw StabilityViolation("phase field exceeded the maximum-principle guard");

    // monitor ledger
    EnergyRecord rec;
    rec.time = next.time;
    rec.energy = phase_energy(next.c, eps, well);
    PhaseField mu = chemical_potential(next.c, eps, well);
    double mu2 = 0.0;
    for (double v : mu.data()) mu2 += v * v;
    mu2 *= h * h;
    const double prev_diss = state.ledger.empty() ? 0.0 : state.ledger.back().dissipated;
    rec.dissipated = prev_diss + dt * (next.vel.grad_norm_sq() + mu2 / eps);
    rec.max_abs_c = sup;
    next.ledger = state.ledger;
    next.ledger.push_back(rec);
    return next;
}

DiffuseRun run_diffuse(const ClosedCurve& curve0, const DiffuseOptions& opts,
                       const OptimalProfile& profile) {
    DiffuseOptions o = opts;
    if (o.grid_n == 0) {
        int n = 32;
        while (1.0 / n > o.eps / 4.0) n *= 2;
        o.grid_n = n;
    }
    if (o.dt == 0.0) o.dt = o.c_stab * o.eps * o.eps;
    Grid2D grid{o.grid_n};

    TubularChart chart(curve0, o.delta);
    DiffuseState st;
    st.c = init_phase(chart, o.eps, profile, grid, o.bc, o.delta);
    st.vel = VelocityField(grid, o.bc);
    st.eps = o.eps;
    st.time = 0.0;
    st.initial_sup = std::max(st.c.max_abs(), 1.0);
    EnergyRecord rec0;
    rec0.time = 0.0;
    rec0.energy = phase_energy(st.c, o.eps, profile.well);
    rec0.dissipated = 0.0;
    rec0.max_abs_c = st.c.max_abs();
    st.ledger.push_back(rec0);

    DiffuseRun out;
    out.grid_h = grid.h();
    out.dt = o.dt;
    const int steps = static_cast<int>(std::round(o.t_final / o.dt));
    auto snapshot = [&](const DiffuseState& s) {
        out.snapshot_times.push_back(s.time);
        out.snapshots.push_back(s.c);
        out.velocity_snapshots.push_back(s.vel);
    };
    snapshot(st);
    for (int k = 0; k < steps; ++k) {
        st = step(st, o.dt, o, profile);
        if ((o.output_every > 0 && (k + 1) % o.output_every == 0) || k + 1 == steps) snapshot(st);
    }
    out.ledger = st.ledger;
    out.final_state = std::move(st);
    return out;
}

std::vector<Vec2> zero_level_points(const PhaseField& c) {
    const Grid2D grid = c.grid();
    const int n = grid.n;
    std::vector<Vec2> pts;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double a = c.at(i, j);
            const double bx = c.ghosted(i + 1, j);
            if ((a <= 0.0) != (bx <= 0.0)) {
                const double t = a / (a - bx);
                Vec2 p = grid.center(i, j);
                pts.push_back({p[0] + t * grid.h(), p[1]});
            }
            const double by = c.ghosted(i, j + 1);
            if ((a <= 0.0) != (by <= 0.0)) {
                const double t = a / (a - by);
                Vec2 p = grid.center(i, j);
                pts.push_back({p[0], p[1] + t * grid.h()});
            }
        }
    return pts;
}

CircleFit fit_circle(const std::vector<Vec2>& pts) {
    // Kasa fit: x^2 + y^2 + D x + E y + F = 0 in least squares
    double Sxx = 0, Sxy = 0, Syy = 0, Sx = 0, Sy = 0, Sxz = 0, Syz = 0, Sz = 0;
    const double m = static_cast<double>(pts.size());
    for (auto& p : pts) {
        const double z = p[0] * p[0] + p[1] * p[1];
        Sxx += p[0] * p[0];
        Sxy += p[0] * p[1];
        Syy += p[1] * p[1];
        Sx += p[0];
        Sy += p[1];
        Sxz += p[0] * z;
        Syz += p[1] * z;
        Sz += z;
    }
    // normal equations for (D, E, F)
    double A[3][3] = {{Sxx, Sxy, Sx}, {Sxy, Syy, Sy}, {Sx, Sy, m}};
    double b[3] = {-Sxz, -Syz, -Sz};
    // Gaussian elimination
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        std::swap(A[col], A[piv]);
        std::swap(b[col], b[piv]);
        for (int r = col + 1; r < 3; ++r) {
            const double f = A[r][col] / A[col][col];
            for (int k = col; k < 3; ++k) A[r][k] -= f * A[col][k];
            b[r] -= f * b[col];
        }
    }
    double x[3];
    for (int r = 2; r >= 0; --r) {
        double acc = b[r];
        for (int k = r + 1; k < 3; ++k) acc -= A[r][k] * x[k];
        x[r] = acc / A[r][r];
    }
    CircleFit fit;
    fit.center = {-0.5 * x[0], -0.5 * x[1]};
    fit.radius = std::sqrt(std::max(0.0, 0.25 * (x[0] * x[0] + x[1] * x[1]) - x[2]));
    return fit;
}

}  // namespace acstokes
