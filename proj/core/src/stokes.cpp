#include "acstokes/stokes.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>

#include "acstokes/errors.hpp"

namespace acstokes {

namespace {

using cd = std::complex<double>;

fftw_plan plan_c2c_2d(int ny, int nx, int sign) {
    static std::map<std::tuple<int, int, int>, fftw_plan> cache;
    auto key = std::make_tuple(ny, nx, sign);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<cd> tmp(static_cast<size_t>(nx) * ny);
    fftw_plan p = fftw_plan_dft_2d(ny, nx, reinterpret_cast<fftw_complex*>(tmp.data()),
                                   reinterpret_cast<fftw_complex*>(tmp.data()), sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache.emplace(key, p);
    return p;
}

void fft2(std::vector<cd>& a, int ny, int nx, int sign) {
    fftw_execute_dft(plan_c2c_2d(ny, nx, sign), reinterpret_cast<fftw_complex*>(a.data()),
                     reinterpret_cast<fftw_complex*>(a.data()));
}

fftw_plan plan_r2r_2d(int ny, int nx, fftw_r2r_kind ky, fftw_r2r_kind kx) {
    static std::map<std::tuple<int, int, int, int>, fftw_plan> cache;
    auto key = std::make_tuple(ny, nx, static_cast<int>(ky), static_cast<int>(kx));
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<double> tmp(static_cast<size_t>(nx) * ny);
    fftw_plan p = fftw_plan_r2r_2d(ny, nx, tmp.data(), tmp.data(), ky, kx,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache.emplace(key, p);
    return p;
}

void r2r(std::vector<double>& a, int ny, int nx, fftw_r2r_kind ky, fftw_r2r_kind kx) {
    fftw_execute_r2r(plan_r2r_2d(ny, nx, ky, kx), a.data(), a.data());
}

// ---- periodic: exact staggered Fourier projection --------------------------

VelocityField solve_periodic(const Grid2D& grid, const FaceField& force, StokesReport* report) {
    const int n = grid.n;
    const double h = grid.h();
    VelocityField vel(grid, BoundaryMode::Periodic);

    std::vector<cd> fu(grid.cells()), fv(grid.cells());
    for (size_t k = 0; k < grid.cells(); ++k) {
        fu[k] = force.fu[k];
        fv[k] = force.fv[k];
    }
    fft2(fu, n, n, FFTW_FORWARD);
    fft2(fv, n, n, FFTW_FORWARD);

    const double mean_u = fu[0].real() / grid.cells();
    const double mean_v = fv[0].real() / grid.cells();
    if (report) report->removed_mean = {mean_u, mean_v};
    fu[0] = 0.0;
    fv[0] = 0.0;

    std::vector<cd> pu(grid.cells()), pv(grid.cells()), pp(grid.cells());
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const size_t id = grid.idx(i, j);
            if (i == 0 && j == 0) {
                pu[id] = pv[id] = pp[id] = 0.0;
                continue;
            }
            const cd wx = std::polar(1.0, 2.0 * M_PI * i / n);
            const cd wy = std::polar(1.0, 2.0 * M_PI * j / n);
            const cd Dx = (wx - 1.0) / h, Dy = (wy - 1.0) / h;       // divergence symbol
            const cd Gx = (1.0 - std::conj(wx)) / h, Gy = (1.0 - std::conj(wy)) / h;  // gradient
            const double mu = (4.0 * std::pow(std::sin(M_PI * i / n), 2) +
                               4.0 * std::pow(std::sin(M_PI * j / n), 2)) /
                              (h * h);  // -Laplacian symbol
            const cd divf = Dx * fu[id] + Dy * fv[id];
            pp[id] = -divf / mu;
            pu[id] = (fu[id] - Gx * pp[id]) / mu;
            pv[id] = (fv[id] - Gy * pp[id]) / mu;
        }
    }
    fft2(pu, n, n, FFTW_BACKWARD);
    fft2(pv, n, n, FFTW_BACKWARD);
    fft2(pp, n, n, FFTW_BACKWARD);
    const double inv = 1.0 / grid.cells();
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            vel.u(i, j) = pu[grid.idx(i, j)].real() * inv;
            vel.v(i, j) = pv[grid.idx(i, j)].real() * inv;
            vel.p(i, j) = pp[grid.idx(i, j)].real() * inv;
        }
    if (report) report->residual = 0.0;
    return vel;
}

// ---- Dirichlet: DST component solves + Schur-complement CG -----------------

// -lap with u = 0 on x-walls (on nodes) and reflected no-slip ghosts on
// y-walls; unknowns are the interior columns of the u-grid.
struct DirichletSolver {
    int n;
    double h;

    // u-component: (n-1) x n interior unknowns, DST-I in x, DST-II in y
    std::vector<double> solve_u(std::vector<double> rhs) const {
        const int nx = n - 1, ny = n;
        r2r(rhs, ny, nx, FFTW_RODFT10, FFTW_RODFT00);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const double lx = 2.0 * std::cos(M_PI * (i + 1) / n) - 2.0;
                const double ly = 2.0 * std::cos(M_PI * (j + 1) / n) - 2.0;
                rhs[static_cast<size_t>(j) * nx + i] /= -(lx + ly) / (h * h);
            }
        r2r(rhs, ny, nx, FFTW_RODFT01, FFTW_RODFT00);
        const double scale = 1.0 / (2.0 * n * 2.0 * n);
        for (auto& x : rhs) x *= scale;
        return rhs;
    }

    std::vector<double> solve_v(std::vector<double> rhs) const {
        const int nx = n, ny = n - 1;
        r2r(rhs, ny, nx, FFTW_RODFT00, FFTW_RODFT10);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const double lx = 2.0 * std::cos(M_PI * (i + 1) / n) - 2.0;
                const double ly = 2.0 * std::cos(M_PI * (j + 1) / n) - 2.0;
                rhs[static_cast<size_t>(j) * nx + i] /= -(lx + ly) / (h * h);
            }
        r2r(rhs, ny, nx, FFTW_RODFT00, FFTW_RODFT01);
        const double scale = 1.0 / (2.0 * n * 2.0 * n);
        for (auto& x : rhs) x *= scale;
        return rhs;
    }
};

struct PackedVelocity {
    std::vector<double> u;  // (n-1) x n interior u-faces
    std::vector<double> v;  // n x (n-1) interior v-faces
};

PackedVelocity apply_inverse(const DirichletSolver& S, const PackedVelocity& f) {
    return {S.solve_u(f.u), S.solve_v(f.v)};
}

// divergence over cells from packed interior faces (boundary faces are 0)
std::vector<double> packed_div(int n, double h, const PackedVelocity& w) {
    std::vector<double> d(static_cast<size_t>(n) * n, 0.0);
    auto uat = [&](int i, int j) {
        return (i >= 1 && i <= n - 1) ? w.u[static_cast<size_t>(j) * (n - 1) + (i - 1)] : 0.0;
    };
    auto vat = [&](int i, int j) {
        return (j >= 1 && j <= n - 1) ? w.v[static_cast<size_t>(j - 1) * n + i] : 0.0;
    };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            d[static_cast<size_t>(j) * n + i] =
                (uat(i + 1, j) - uat(i, j) + vat(i, j + 1) - vat(i, j)) / h;
    return d;
}

PackedVelocity packed_grad(int n, double h, const std::vector<double>& p) {
    PackedVelocity g;
    g.u.assign(static_cast<size_t>(n - 1) * n, 0.0);
    g.v.assign(static_cast<size_t>(n) * (n - 1), 0.0);
    for (int j = 0; j < n; ++j)
        for (int i = 1; i <= n - 1; ++i)
            g.u[static_cast<size_t>(j) * (n - 1) + (i - 1)] =
                (p[static_cast<size_t>(j) * n + i] - p[static_cast<size_t>(j) * n + i - 1]) / h;
    for (int j = 1; j <= n - 1; ++j)
        for (int i = 0; i < n; ++i)
            g.v[static_cast<size_t>(j - 1) * n + i] =
                (p[static_cast<size_t>(j) * n + i] - p[static_cast<size_t>(j - 1) * n + i]) / h;
    return g;
}

VelocityField solve_dirichlet(const Grid2D& grid, const FaceField& force, StokesReport* report) {
    const int n = grid.n;
    const double h = grid.h();
    DirichletSolver S{n, h};

    // pack the interior part of the face force
    PackedVelocity f;
    f.u.assign(static_cast<size_t>(n - 1) * n, 0.0);
    f.v.assign(static_cast<size_t>(n) * (n - 1), 0.0);
    for (int j = 0; j < n; ++j)
        for (int i = 1; i <= n - 1; ++i)
            f.u[static_cast<size_t>(j) * (n - 1) + (i - 1)] =
                force.fu[static_cast<size_t>(j) * (n + 1) + i];
    for (int j = 1; j <= n - 1; ++j)
        for (int i = 0; i < n; ++i)
            f.v[static_cast<size_t>(j - 1) * n + i] = force.fv[static_cast<size_t>(j) * n + i];

    // CG on S p = div(A^{-1} f), S = div A^{-1} grad
    auto apply_S = [&](const std::vector<double>& p) {
        return packed_div(n, h, apply_inverse(S, packed_grad(n, h, p)));
    };
    auto remove_mean = [&](std::vector<double>& p) {
        double m = 0.0;
        for (double x : p) m += x;
        m /= p.size();
        for (double& x : p) x -= m;
    };

    std::vector<double> b = packed_div(n, h, apply_inverse(S, f));
    remove_mean(b);
    std::vector<double> p(b.size(), 0.0), r = b, z = r, Ap;
    double rr = 0.0;
    for (double x : r) rr += x * x;
    const double tol = 1e-22 * std::max(rr, 1e-30);
    int it = 0;
    for (; it < 600 && rr > tol; ++it) {
        Ap = apply_S(z);
        remove_mean(Ap);
        double zAp = 0.0;
        for (size_t k = 0; k < z.size(); ++k) zAp += z[k] * Ap[k];
        const double alpha = rr / zAp;
        for (size_t k = 0; k < p.size(); ++k) {
            p[k] += alpha * z[k];
            r[k] -= alpha * Ap[k];
        }
        double rr_new = 0.0;
        for (double x : r) rr_new += x * x;
        const double beta = rr_new / rr;
        rr = rr_new;
        for (size_t k = 0; k < z.size(); ++k) z[k] = r[k] + beta * z[k];
    }
    remove_mean(p);

    PackedVelocity g = packed_grad(n, h, p);
    PackedVelocity rhs = f;
    for (size_t k = 0; k < rhs.u.size(); ++k) rhs.u[k] -= g.u[k];
    for (size_t k = 0; k < rhs.v.size(); ++k) rhs.v[k] -= g.v[k];
    PackedVelocity w = apply_inverse(S, rhs);

    VelocityField vel(grid, BoundaryMode::Dirichlet);
    for (int j = 0; j < n; ++j)
        for (int i = 1; i <= n - 1; ++i)
            vel.u(i, j) = w.u[static_cast<size_t>(j) * (n - 1) + (i - 1)];
    for (int j = 1; j <= n - 1; ++j)
        for (int i = 0; i < n; ++i) vel.v(i, j) = w.v[static_cast<size_t>(j - 1) * n + i];
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) vel.p(i, j) = p[static_cast<size_t>(j) * n + i];
    if (report) {
        report->iterations = it;
        report->residual = std::sqrt(rr);
    }
    return vel;
}

}  // namespace

VelocityField stokes_solve(const Grid2D& grid, const FaceField& force, BoundaryMode bc,
                           StokesReport* report) {
    if (grid.n < 32) throw ConfigError("stokes_solve: grid must be at least 32^2");
    for (double x : force.fu)
        if (!std::isfinite(x)) throw SingularForcing("force contains non-finite entries");
    for (double x : force.fv)
        if (!std::isfinite(x)) throw SingularForcing("force contains non-finite entries");
    return bc == BoundaryMode::Periodic ? solve_periodic(grid, force, report)
                                        : solve_dirichlet(grid, force, report);
}

FaceField tensor_face_divergence(const Grid2D& grid, BoundaryMode bc,
                                 const std::vector<double>& Txx_v, const std::vector<double>& Txy_v,
                                 const std::vector<double>& Tyy_v, double scale) {
    const int n = grid.n;
    const double h = grid.h();
    const bool per = bc == BoundaryMode::Periodic;
    auto wrapped = [&](const std::vector<double>& t, int i, int j) {
        if (!per) {  // clamp: tensors vanish at the wall for our use cases
            i = std::min(std::max(i, 0), n - 1);
            j = std::min(std::max(j, 0), n - 1);
            return t[grid.idx(i, j)];
        }
        return t[grid.idx((i % n + n) % n, (j % n + n) % n)];
    };
    // Txy averaged to cell corners (ih, jh)
    auto corner = [&](int i, int j) {
        return 0.25 * (wrapped(Txy_v, i, j) + wrapped(Txy_v, i - 1, j) + wrapped(Txy_v, i, j - 1) +
                       wrapped(Txy_v, i - 1, j - 1));
    };

    FaceField F;
    if (per) {
        F.fu.assign(grid.cells(), 0.0);
        F.fv.assign(grid.cells(), 0.0);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                F.fu[grid.idx(i, j)] = scale * ((wrapped(Txx_v, i, j) - wrapped(Txx_v, i - 1, j)) / h +
                                                (corner(i, j + 1) - corner(i, j)) / h);
                F.fv[grid.idx(i, j)] = scale * ((wrapped(Tyy_v, i, j) - wrapped(Tyy_v, i, j - 1)) / h +
                                                (corner(i + 1, j) - corner(i, j)) / h);
            }
    } else {
        F.fu.assign(static_cast<size_t>(n + 1) * n, 0.0);
        F.fv.assign(static_cast<size_t>(n) * (n + 1), 0.0);
        for (int j = 0; j < n; ++j)
            for (int i = 1; i <= n - 1; ++i)
                F.fu[static_cast<size_t>(j) * (n + 1) + i] =
                    scale * ((wrapped(Txx_v, i, j) - wrapped(Txx_v, i - 1, j)) / h +
                             (corner(i, j + 1) - corner(i, j)) / h);
        for (int j = 1; j <= n - 1; ++j)
            for (int i = 0; i < n; ++i)
                F.fv[static_cast<size_t>(j) * n + i] =
                    scale * ((wrapped(Tyy_v, i, j) - wrapped(Tyy_v, i, j - 1)) / h +
                             (corner(i + 1, j) - corner(i, j)) / h);
    }
    return F;
}

FaceField capillary_force(const PhaseField& c, double eps) {
    const Grid2D grid = c.grid();
    const int n = grid.n;
    const double h = grid.h();
    std::vector<double> Txx(grid.cells()), Txy(grid.cells()), Tyy(grid.cells());
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double gx = (c.ghosted(i + 1, j) - c.ghosted(i - 1, j)) / (2 * h);
            const double gy = (c.ghosted(i, j + 1) - c.ghosted(i, j - 1)) / (2 * h);
            Txx[grid.idx(i, j)] = gx * gx;
            Txy[grid.idx(i, j)] = gx * gy;
            Tyy[grid.idx(i, j)] = gy * gy;
        }
    return tensor_face_divergence(grid, c.bc(), Txx, Txy, Tyy, -eps);
}

TractionDensity capillary_traction(const ClosedCurve& curve, int n_samples, double sigma) {
    TractionDensity q;
    q.samples.resize(static_cast<size_t>(n_samples));
    for (int j = 0; j < n_samples; ++j) {
        const double s = static_cast<double>(j) / n_samples;
        q.samples[j] = (-sigma * curve.curvature(s)) * curve.normal(s);
    }
    return q;
}

double ib_kernel(double r) {
    const double a = std::abs(r);
    if (a >= 2.0) return 0.0;
    if (a <= 1.0) return 0.125 * (3.0 - 2.0 * a + std::sqrt(1.0 + 4.0 * a - 4.0 * a * a));
    return 0.125 * (5.0 - 2.0 * a - std::sqrt(-7.0 + 12.0 * a - 4.0 * a * a));
}

namespace {

// scatter one point force onto a staggered component grid
template <typename Put>
void scatter(const Grid2D& grid, Vec2 x0, Vec2 offset, double value, const Put& put) {
    const double h = grid.h();
    const double ax = (x0[0] - offset[0]) / h;
    const double ay = (x0[1] - offset[1]) / h;
    const int i0 = static_cast<int>(std::floor(ax)) - 1;
    const int j0 = static_cast<int>(std::floor(ay)) - 1;
    for (int j = j0; j <= j0 + 3; ++j)
        for (int i = i0; i <= i0 + 3; ++i) {
            const double w = ib_kernel(ax - i) * ib_kernel(ay - j) / (h * h);
            if (w != 0.0) put(i, j, value * w);
        }
}

}  // namespace

int ib_quadrature_count(const Grid2D& grid, const ClosedCurve& curve) {
    const double len = curve.total_length();
    int m = static_cast<int>(std::ceil(2.0 * len / grid.h()));
    m = std::max(m, 2 * curve.n_modes());
    return m;
}

FaceField spread_traction(const Grid2D& grid, const ClosedCurve& curve,
                          const TractionDensity& traction, BoundaryMode bc) {
    const int n = grid.n;
    FaceField F;
    const bool per = bc == BoundaryMode::Periodic;
    F.fu.assign(per ? grid.cells() : static_cast<size_t>(n + 1) * n, 0.0);
    F.fv.assign(per ? grid.cells() : static_cast<size_t>(n) * (n + 1), 0.0);

    const int mq = static_cast<int>(traction.samples.size());
    for (int q = 0; q < mq; ++q) {
        const double s = static_cast<double>(q) / mq;
        const double w = curve.speed(s) / mq;  // arclength weight
        Vec2 x0 = curve.position(s);
        Vec2 f = traction.samples[q];
        scatter(grid, x0, {0.0, 0.5 * grid.h()}, f[0] * w, [&](int i, int j, double val) {
            if (per)
                F.fu[grid.idx((i % n + n) % n, (j % n + n) % n)] += val;
            else if (i >= 1 && i <= n - 1 && j >= 0 && j < n)
                F.fu[static_cast<size_t>(j) * (n + 1) + i] += val;
        });
        scatter(grid, x0, {0.5 * grid.h(), 0.0}, f[1] * w, [&](int i, int j, double val) {
            if (per)
                F.fv[grid.idx((i % n + n) % n, (j % n + n) % n)] += val;
            else if (j >= 1 && j <= n - 1 && i >= 0 && i < n)
                F.fv[static_cast<size_t>(j) * n + i] += val;
        });
    }
    return F;
}

std::vector<Vec2> interface_trace(const VelocityField& vel, const ClosedCurve& curve,
                                  int n_samples) {
    const Grid2D grid = vel.grid();
    const double h = grid.h();
    std::vector<Vec2> out(static_cast<size_t>(n_samples), Vec2{0.0, 0.0});
    for (int q = 0; q < n_samples; ++q) {
        const double s = static_cast<double>(q) / n_samples;
        Vec2 x0 = curve.position(q == 0 ? 0.0 : s);
        double us = 0.0, vs = 0.0;
        {
            const double ax = x0[0] / h, ay = x0[1] / h - 0.5;
            const int i0 = static_cast<int>(std::floor(ax)) - 1;
            const int j0 = static_cast<int>(std::floor(ay)) - 1;
            for (int j = j0; j <= j0 + 3; ++j)
                for (int i = i0; i <= i0 + 3; ++i)
                    us += vel.u_wrap(i, j) * ib_kernel(ax - i) * ib_kernel(ay - j);
        }
        {
            const double bx = x0[0] / h - 0.5, by = x0[1] / h;
            const int i0 = static_cast<int>(std::floor(bx)) - 1;
            const int j0 = static_cast<int>(std::floor(by)) - 1;
            for (int j = j0; j <= j0 + 3; ++j)
                for (int i = i0; i <= i0 + 3; ++i)
                    vs += vel.v_wrap(i, j) * ib_kernel(bx - i) * ib_kernel(by - j);
        }
        out[q] = {us, vs};
    }
    return out;
}

VelocityField traction_solve(const Grid2D& grid, const ClosedCurve& curve,
                             const TractionDensity& traction, BoundaryMode bc,
                             StokesReport* report) {
    if (bc == BoundaryMode::Dirichlet) {
        TubularChart chart(curve);
        auto pts = curve.sample(4 * curve.n_modes());
        for (auto& p : pts) {
            const double margin = 3.0 * chart.delta();
            if (p[0] < margin || p[0] > 1.0 - margin || p[1] < margin || p[1] > 1.0 - margin)
                throw ClearanceViolation("interface tube touches the box boundary");
        }
    }
    // a prescribed stress jump [2Dv - pI]n = a is generated by the interfacial
    // body force -a delta_Gamma (pillbox balance across the interface)
    TractionDensity body = traction;
    for (auto& s : body.samples) s = -1.0 * s;
    FaceField F = spread_traction(grid, curve, body, bc);
    return stokes_solve(grid, F, bc, report);
}

OneSidedFit one_sided_fit(const std::vector<double>& offsets, const std::vector<double>& values) {
    // least squares for value + slope*r + 0.5*curv*r^2
    double S0 = 0, S1 = 0, S2 = 0, S3 = 0, S4 = 0, b0 = 0, b1 = 0, b2 = 0;
    for (size_t k = 0; k < offsets.size(); ++k) {
        const double r = offsets[k], y = values[k];
        S0 += 1;
        S1 += r;
        S2 += r * r;
        S3 += r * r * r;
        S4 += r * r * r * r;
        b0 += y;
        b1 += r * y;
        b2 += r * r * y;
    }
    // solve the 3x3 normal equations by Cramer
    const double A[3][3] = {{S0, S1, 0.5 * S2}, {S1, S2, 0.5 * S3}, {S2, S3, 0.5 * S4}};
    const double B[3] = {b0, b1, b2};
    auto det3 = [](const double M[3][3]) {
        return M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) -
               M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
               M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
    };
    const double D = det3(A);
    OneSidedFit fit;
    double M[3][3];
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) M[i][j] = (j == c) ? B[i] : A[i][j];
        const double x = det3(M) / D;
        if (c == 0) fit.value = x;
        if (c == 1) fit.slope = x;
        if (c == 2) fit.curvature = x;
    }
    return fit;
}

}  // namespace acstokes
